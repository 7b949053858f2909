#include "trinity/checkpoint.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <map>
#include <sstream>
#include <vector>

#include "trinity/config.hpp"

namespace trinity {

static_assert(std::endian::native == std::endian::little,
              "checkpoint format assumes a little-endian host");

namespace {

class Writer {
 public:
  template <class T>
  void put(T v) {
    static_assert(std::is_trivially_copyable_v<T>);
    buf_.append(reinterpret_cast<const char*>(&v), sizeof(T));
  }
  void put_str(std::string_view s) {
    put(static_cast<std::uint32_t>(s.size()));
    buf_.append(s);
  }
  void put_doubles(const double* p, std::size_t n) {
    buf_.append(reinterpret_cast<const char*>(p), n * sizeof(double));
  }
  std::string& str() { return buf_; }

 private:
  std::string buf_;
};

class Reader {
 public:
  explicit Reader(std::string_view bytes) : bytes_(bytes) {}
  template <class T>
  T get() {
    need(sizeof(T));
    T v;
    std::memcpy(&v, bytes_.data() + pos_, sizeof(T));
    pos_ += sizeof(T);
    return v;
  }
  std::string get_str() {
    const auto n = get<std::uint32_t>();
    need(n);
    std::string s(bytes_.substr(pos_, n));
    pos_ += n;
    return s;
  }
  void get_doubles(double* p, std::size_t n) {
    need(n * sizeof(double));
    std::memcpy(p, bytes_.data() + pos_, n * sizeof(double));
    pos_ += n * sizeof(double);
  }
  bool done() const { return pos_ == bytes_.size(); }

 private:
  void need(std::size_t n) const {
    if (bytes_.size() - pos_ < n) throw IoError("checkpoint: truncated section");
  }
  std::string_view bytes_;
  std::size_t pos_ = 0;
};

void put_blocks(Writer& w, const Parameters& p) {
  std::uint32_t count = 0;
  p.for_each_block([&](const std::string&, const Mat&) { ++count; });
  w.put(count);
  p.for_each_block([&](const std::string& name, const Mat& m) {
    w.put_str(name);
    w.put(static_cast<std::uint32_t>(m.rows()));
    w.put(static_cast<std::uint32_t>(m.cols()));
    w.put_doubles(m.data(), static_cast<std::size_t>(m.size()));
  });
}

// Fills the blocks of `p` (already shaped from the config) by name.
void get_blocks(Reader& r, Parameters& p) {
  std::map<std::string, Mat*> by_name;
  p.for_each_block([&](const std::string& name, Mat& m) { by_name[name] = &m; });
  const auto count = r.get<std::uint32_t>();
  if (count != by_name.size()) {
    throw IoError("checkpoint: expected " + std::to_string(by_name.size()) + " parameter blocks, found " +
                  std::to_string(count));
  }
  for (std::uint32_t i = 0; i < count; ++i) {
    const std::string name = r.get_str();
    const auto rows = r.get<std::uint32_t>();
    const auto cols = r.get<std::uint32_t>();
    auto it = by_name.find(name);
    if (it == by_name.end()) throw IoError("checkpoint: unknown parameter block '" + name + "'");
    Mat& m = *it->second;
    if (m.rows() != rows || m.cols() != cols) {
      throw IoError("checkpoint: block '" + name + "' has shape " + std::to_string(rows) + "x" +
                    std::to_string(cols) + ", config implies " + std::to_string(m.rows()) + "x" +
                    std::to_string(m.cols()));
    }
    r.get_doubles(m.data(), static_cast<std::size_t>(m.size()));
  }
}

}  // namespace

std::string serialize_checkpoint(const Checkpoint& ck) {
  std::vector<std::pair<std::string, std::string>> sections;
  sections.emplace_back("config", nlohmann::json(ck.config).dump());
  {
    Writer w;
    w.put(static_cast<std::int32_t>(ck.lineage.created_day));
    w.put(static_cast<std::uint8_t>(ck.lineage.accepted ? 1 : 0));
    w.put_str(ck.lineage.parent_id);
    sections.emplace_back("lineage", std::move(w.str()));
  }
  {
    Writer w;
    put_blocks(w, ck.params);
    sections.emplace_back("params", std::move(w.str()));
  }
  {
    Writer w;
    w.put(static_cast<std::uint32_t>(ck.norm.size()));
    w.put(ck.norm.epsilon);
    w.put_doubles(ck.norm.mean.data(), ck.norm.mean.size());
    w.put_doubles(ck.norm.std.data(), ck.norm.std.size());
    sections.emplace_back("norm", std::move(w.str()));
  }
  {
    Writer w;
    w.put(static_cast<std::uint32_t>(ck.bins.size()));
    w.put(static_cast<std::uint32_t>(ck.bins.n_buckets));
    w.put(static_cast<std::uint8_t>(ck.bins.reserve_zero ? 1 : 0));
    for (const auto& b : ck.bins.boundaries) {
      w.put(static_cast<std::uint32_t>(b.size()));
      w.put_doubles(b.data(), b.size());
    }
    sections.emplace_back("bins", std::move(w.str()));
  }
  {
    Writer w;
    w.put(static_cast<std::uint64_t>(ck.adam.step));
    put_blocks(w, ck.adam.m);
    put_blocks(w, ck.adam.v);
    sections.emplace_back("adam", std::move(w.str()));
  }

  std::size_t header = kCheckpointMagic.size() + 4 + 8 + 4;
  for (const auto& [name, payload] : sections) header += 4 + name.size() + 8 + 8;
  Writer out;
  out.str().append(kCheckpointMagic);
  out.put(kCheckpointSchemaVersion);
  out.put(ck.config_hash());
  out.put(static_cast<std::uint32_t>(sections.size()));
  std::uint64_t offset = header;
  for (const auto& [name, payload] : sections) {
    out.put_str(name);
    out.put(offset);
    out.put(static_cast<std::uint64_t>(payload.size()));
    offset += payload.size();
  }
  for (const auto& [name, payload] : sections) out.str().append(payload);
  return std::move(out.str());
}

Checkpoint deserialize_checkpoint(std::string_view bytes) {
  if (bytes.substr(0, kCheckpointMagic.size()) != kCheckpointMagic) {
    throw IoError("checkpoint: bad magic");
  }
  Reader head(bytes.substr(kCheckpointMagic.size()));
  const auto version = head.get<std::uint32_t>();
  if (version != kCheckpointSchemaVersion) {
    throw IoError("checkpoint: unsupported schema_version " + std::to_string(version));
  }
  const auto stored_hash = head.get<std::uint64_t>();
  const auto n_sections = head.get<std::uint32_t>();
  std::map<std::string, std::string_view> sections;
  for (std::uint32_t i = 0; i < n_sections; ++i) {
    std::string name = head.get_str();
    const auto offset = head.get<std::uint64_t>();
    const auto size = head.get<std::uint64_t>();
    if (offset > bytes.size() || size > bytes.size() - offset) {
      throw IoError("checkpoint: section '" + name + "' out of bounds");
    }
    sections[name] = bytes.substr(offset, size);
  }
  auto section = [&](const std::string& name) {
    auto it = sections.find(name);
    if (it == sections.end()) throw IoError("checkpoint: missing section '" + name + "'");
    return it->second;
  };

  ModelConfig config;
  try {
    config = nlohmann::json::parse(section("config")).get<ModelConfig>();
  } catch (const nlohmann::json::exception& e) {
    throw IoError(std::string("checkpoint: malformed config: ") + e.what());
  }
  if (config_hash(config) != stored_hash) throw IoError("checkpoint: config hash mismatch");

  // Shapes come from the config; values are overwritten below.
  Checkpoint ck = init_model(config, 0);
  {
    Reader r(section("lineage"));
    ck.lineage.created_day = r.get<std::int32_t>();
    ck.lineage.accepted = r.get<std::uint8_t>() != 0;
    ck.lineage.parent_id = r.get_str();
  }
  {
    Reader r(section("params"));
    get_blocks(r, ck.params);
    if (!r.done()) throw IoError("checkpoint: trailing bytes in params");
  }
  {
    Reader r(section("norm"));
    const auto n = r.get<std::uint32_t>();
    ck.norm.epsilon = r.get<double>();
    ck.norm.mean.resize(n);
    ck.norm.std.resize(n);
    r.get_doubles(ck.norm.mean.data(), n);
    r.get_doubles(ck.norm.std.data(), n);
  }
  {
    Reader r(section("bins"));
    const auto n = r.get<std::uint32_t>();
    ck.bins.n_buckets = static_cast<int>(r.get<std::uint32_t>());
    ck.bins.reserve_zero = r.get<std::uint8_t>() != 0;
    ck.bins.boundaries.resize(n);
    for (auto& b : ck.bins.boundaries) {
      b.resize(r.get<std::uint32_t>());
      r.get_doubles(b.data(), b.size());
    }
  }
  {
    Reader r(section("adam"));
    ck.adam.step = static_cast<long>(r.get<std::uint64_t>());
    get_blocks(r, ck.adam.m);
    get_blocks(r, ck.adam.v);
  }
  return ck;
}

void write_checkpoint(const Checkpoint& ck, const std::filesystem::path& path) {
  write_text_file(path, serialize_checkpoint(ck));
}

Checkpoint read_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return deserialize_checkpoint(ss.str());
}

}  // namespace trinity

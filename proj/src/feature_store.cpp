#include "trinity/feature_store.hpp"

#include <algorithm>

namespace trinity {

std::array<double, kTensorSize> BehaviorTensor::flatten() const {
  std::array<double, kTensorSize> out{};
  for (int i = 0; i < kTensorSize; ++i) out[i] = counts[i];
  return out;
}

BehaviorTensor BehaviorTensor::unflatten(std::span<const double> values, std::int64_t ref_time) {
  if (values.size() != kTensorSize) {
    throw ContractError("unflatten: expected " + std::to_string(kTensorSize) + " values");
  }
  BehaviorTensor t;
  t.ref_time = ref_time;
  for (int i = 0; i < kTensorSize; ++i) t.counts[i] = static_cast<std::int32_t>(values[i]);
  return t;
}

BehaviorTensor build_tensor(std::span<const Event> user_events, std::int64_t ref_time) {
  BehaviorTensor t;
  t.ref_time = ref_time;
  for (std::size_t i = 1; i < user_events.size(); ++i) {
    if (user_events[i].timestamp < user_events[i - 1].timestamp) {
      throw ContractError("build_tensor: events are not sorted by timestamp");
    }
  }
  const std::int64_t oldest = ref_time - kWindowSeconds.back();
  auto first = std::lower_bound(
      user_events.begin(), user_events.end(), oldest,
      [](const Event& e, std::int64_t ts) { return e.timestamp < ts; });
  for (auto it = first; it != user_events.end() && it->timestamp < ref_time; ++it) {
    const std::int64_t age = ref_time - it->timestamp;
    const int s = static_cast<int>(it->scenario);
    const int c = static_cast<int>(it->card_type);
    const int a = static_cast<int>(it->action);
    for (int w = 0; w < kNumWindows; ++w) {
      if (age > kWindowSeconds[w]) continue;
      ++t.counts[tensor_index(w, s, c, a)];
      ++t.counts[tensor_index(w, kAllScenarios, c, a)];
    }
  }
  return t;
}

std::string feature_name(int index) {
  const int a = index % kNumActions;
  const int c = (index / kNumActions) % kNumCardTypes;
  const int s = (index / (kNumActions * kNumCardTypes)) % kNumTensorScenarios;
  const int w = index / (kNumActions * kNumCardTypes * kNumTensorScenarios);
  const std::string_view scen = s == kAllScenarios ? "all" : to_string(static_cast<Scenario>(s));
  std::string name = "f_";
  name += kWindowNames[w];
  name += '_';
  name += scen;
  name += '_';
  name += to_string(static_cast<CardType>(c));
  name += '_';
  name += to_string(static_cast<Action>(a));
  return name;
}

std::array<double, kProfileWidth> profile_features(const UserProfile& user) {
  std::array<double, kProfileWidth> p{};
  p[static_cast<int>(user.activity_level)] = 1.0;
  p[2 + static_cast<int>(user.scenario_membership)] = 1.0;
  return p;
}

void SampleSet::reserve(std::size_t n) {
  user_id.reserve(n);
  timestamp.reserve(n);
  label_click.reserve(n);
  label_duration.reserve(n);
  scenario.reserve(n);
  card.reserve(n);
  dense.reserve(n * static_cast<std::size_t>(n_features_));
  profile.reserve(n * kProfileWidth);
}

void SampleSet::push_back(const SampleRow& row) {
  if (static_cast<int>(row.dense_features.size()) != n_features_) {
    throw ContractError("SampleSet: row has " + std::to_string(row.dense_features.size()) +
                        " dense features, expected " + std::to_string(n_features_));
  }
  user_id.push_back(row.user_id);
  timestamp.push_back(row.timestamp);
  label_click.push_back(row.label_click);
  label_duration.push_back(row.label_duration_class);
  scenario.push_back(row.context_scenario);
  card.push_back(row.context_card_type);
  for (double v : row.dense_features) dense.push_back(static_cast<float>(v));
  profile.insert(profile.end(), row.profile_features.begin(), row.profile_features.end());
}

void SampleSet::append(const SampleSet& other) {
  if (other.n_features_ != n_features_) throw ContractError("SampleSet: feature width mismatch");
  user_id.insert(user_id.end(), other.user_id.begin(), other.user_id.end());
  timestamp.insert(timestamp.end(), other.timestamp.begin(), other.timestamp.end());
  label_click.insert(label_click.end(), other.label_click.begin(), other.label_click.end());
  label_duration.insert(label_duration.end(), other.label_duration.begin(),
                        other.label_duration.end());
  scenario.insert(scenario.end(), other.scenario.begin(), other.scenario.end());
  card.insert(card.end(), other.card.begin(), other.card.end());
  dense.insert(dense.end(), other.dense.begin(), other.dense.end());
  profile.insert(profile.end(), other.profile.begin(), other.profile.end());
}

SampleRow SampleSet::row(std::size_t i) const {
  SampleRow r;
  r.user_id = user_id.at(i);
  r.timestamp = timestamp[i];
  r.label_click = label_click[i];
  r.label_duration_class = label_duration[i];
  r.context_scenario = scenario[i];
  r.context_card_type = card[i];
  auto d = dense_row(i);
  r.dense_features.assign(d.begin(), d.end());
  auto p = profile_row(i);
  std::copy(p.begin(), p.end(), r.profile_features.begin());
  return r;
}

SampleSet SampleSet::subset(std::span<const std::size_t> indices) const {
  SampleSet out(n_features_);
  out.reserve(indices.size());
  for (std::size_t i : indices) {
    out.user_id.push_back(user_id.at(i));
    out.timestamp.push_back(timestamp[i]);
    out.label_click.push_back(label_click[i]);
    out.label_duration.push_back(label_duration[i]);
    out.scenario.push_back(scenario[i]);
    out.card.push_back(card[i]);
    auto d = dense_row(i);
    out.dense.insert(out.dense.end(), d.begin(), d.end());
    auto p = profile_row(i);
    out.profile.insert(out.profile.end(), p.begin(), p.end());
  }
  return out;
}

UserEventIndex::UserEventIndex(std::span<const Event> log) {
  for (const Event& e : log) by_user_[e.user_id].push_back(e);
  for (auto& [user, events] : by_user_) {
    std::stable_sort(events.begin(), events.end(), [](const Event& a, const Event& b) {
      return a.timestamp < b.timestamp;
    });
  }
}

std::span<const Event> UserEventIndex::events(std::int64_t user_id) const {
  auto it = by_user_.find(user_id);
  if (it == by_user_.end()) return {};
  return it->second;
}

SampleSet snapshot_rows(const UserEventIndex& index, std::span<const Impression> impressions,
                        std::span<const UserProfile> population, std::int64_t window_horizon) {
  std::unordered_map<std::int64_t, const UserProfile*> profiles;
  profiles.reserve(population.size());
  for (const UserProfile& u : population) profiles.emplace(u.user_id, &u);

  SampleSet out(kTensorSize);
  out.reserve(impressions.size());
  SampleRow row;
  row.dense_features.resize(kTensorSize);
  for (const Impression& imp : impressions) {
    std::span<const Event> events = index.events(imp.user_id);
    auto first = std::lower_bound(
        events.begin(), events.end(), imp.timestamp - window_horizon,
        [](const Event& e, std::int64_t ts) { return e.timestamp < ts; });
    auto last = std::lower_bound(
        first, events.end(), imp.timestamp,
        [](const Event& e, std::int64_t ts) { return e.timestamp < ts; });
    const BehaviorTensor t = build_tensor({first, last}, imp.timestamp);

    row.user_id = imp.user_id;
    row.timestamp = imp.timestamp;
    row.label_click = imp.click ? 1 : 0;
    row.label_duration_class = duration_class(imp.dwell_seconds);
    row.context_scenario = imp.scenario;
    row.context_card_type = imp.card_type;
    for (int i = 0; i < kTensorSize; ++i) row.dense_features[i] = t.counts[i];
    auto p = profiles.find(imp.user_id);
    row.profile_features = p == profiles.end() ? std::array<double, kProfileWidth>{}
                                               : profile_features(*p->second);
    out.push_back(row);
  }
  return out;
}

SampleSet snapshot_rows(std::span<const Event> log, std::span<const Impression> impressions,
                        std::span<const UserProfile> population, std::int64_t window_horizon) {
  return snapshot_rows(UserEventIndex(log), impressions, population, window_horizon);
}

namespace {

template <class Get>
void fill_target(const Get& dense_at, Scenario scenario, CardType card, auto& out) {
  const int s = static_cast<int>(scenario);
  const int c = static_cast<int>(card);
  int k = 0;
  for (int w = 0; w < kNumWindows; ++w) {
    for (int a = 0; a < kNumActions; ++a) out[k++] = dense_at(tensor_index(w, s, c, a));
  }
}

}  // namespace

SampleRow restrict_to_target(const SampleRow& row) {
  if (row.dense_features.size() != kTensorSize) {
    throw ContractError("restrict_to_target: row must carry the full tensor");
  }
  SampleRow out = row;
  out.dense_features.assign(kTargetFeatureCount, 0.0);
  fill_target([&](int i) { return row.dense_features[i]; }, row.context_scenario,
              row.context_card_type, out.dense_features);
  return out;
}

SampleSet restrict_to_target(const SampleSet& rows) {
  if (rows.n_features() != kTensorSize) {
    throw ContractError("restrict_to_target: rows must carry the full tensor");
  }
  SampleSet out(kTargetFeatureCount);
  out.user_id = rows.user_id;
  out.timestamp = rows.timestamp;
  out.label_click = rows.label_click;
  out.label_duration = rows.label_duration;
  out.scenario = rows.scenario;
  out.card = rows.card;
  out.profile = rows.profile;
  out.dense.resize(rows.size() * kTargetFeatureCount);
  for (std::size_t i = 0; i < rows.size(); ++i) {
    auto src = rows.dense_row(i);
    std::span<float> dst(out.dense.data() + i * kTargetFeatureCount, kTargetFeatureCount);
    fill_target([&](int k) { return src[k]; }, rows.scenario[i], rows.card[i], dst);
  }
  return out;
}

}  // namespace trinity

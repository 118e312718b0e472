#include "netlasso/trip_data.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <random>
#include <set>
#include <sstream>

namespace netlasso {

// ---------------------------------------------------------------------------
// Timestamps

Timestamp parse_timestamp(std::string_view text) {
  using namespace std::chrono;
  text = trim(text);
  // YYYY-MM-DD HH:MM:SS
  if (text.size() != 19 || text[4] != '-' || text[7] != '-' || (text[10] != ' ' && text[10] != 'T') ||
      text[13] != ':' || text[16] != ':') {
    throw std::invalid_argument("bad timestamp: '" + std::string(text) + "'");
  }
  const auto field = [&](std::size_t pos, std::size_t len) { return static_cast<int>(parse_int(text.substr(pos, len))); };
  const year_month_day ymd{year{field(0, 4)}, month{static_cast<unsigned>(field(5, 2))},
                           day{static_cast<unsigned>(field(8, 2))}};
  const int hh = field(11, 2);
  const int mm = field(14, 2);
  const int ss = field(17, 2);
  if (!ymd.ok() || hh > 23 || mm > 59 || ss > 59 || hh < 0 || mm < 0 || ss < 0) {
    throw std::invalid_argument("bad timestamp: '" + std::string(text) + "'");
  }
  return sys_days{ymd} + hours{hh} + minutes{mm} + seconds{ss};
}

std::string format_timestamp(Timestamp t) {
  using namespace std::chrono;
  const auto day_start = floor<days>(t);
  const year_month_day ymd{day_start};
  const hh_mm_ss<seconds> tod{t - day_start};
  char buf[64];
  std::snprintf(buf, sizeof buf, "%04d-%02u-%02u %02ld:%02ld:%02ld", static_cast<int>(ymd.year()),
                static_cast<unsigned>(ymd.month()), static_cast<unsigned>(ymd.day()),
                static_cast<long>(tod.hours().count()), static_cast<long>(tod.minutes().count()),
                static_cast<long>(tod.seconds().count()));
  return buf;
}

int hour_of_day(Timestamp t) {
  using namespace std::chrono;
  return static_cast<int>(duration_cast<hours>(t - floor<days>(t)).count());
}

int day_of_month(Timestamp t) {
  using namespace std::chrono;
  return static_cast<int>(static_cast<unsigned>(year_month_day{floor<days>(t)}.day()));
}

int weekday_index(Timestamp t) {
  using namespace std::chrono;
  // iso_encoding: Monday = 1 ... Sunday = 7
  return static_cast<int>(weekday{floor<days>(t)}.iso_encoding()) - 1;
}

double TripRecord::duration_minutes() const {
  return static_cast<double>((dropoff_time - pickup_time).count()) / 60.0;
}

// ---------------------------------------------------------------------------
// Schema

const std::vector<std::string>& canonical_trip_fields() {
  static const std::vector<std::string> fields = {
      "vendor_id",   "pickup_time", "dropoff_time",    "store_flag",  "rate_code",  "pickup_lon", "pickup_lat",
      "dropoff_lon", "dropoff_lat", "passenger_count", "trip_distance", "fare_amount", "extra",   "mta_tax",
      "tip_amount",  "toll_amount", "ehail_fee",       "surcharge",   "total_amount", "pay_type", "trip_type"};
  return fields;
}

SchemaMap default_schema_map() {
  return {{"vendor_id", "VendorID"},
          {"pickup_time", "lpep_pickup_datetime"},
          {"dropoff_time", "Lpep_dropoff_datetime"},
          {"store_flag", "Store_and_fwd_flag"},
          {"rate_code", "RateCodeID"},
          {"pickup_lon", "Pickup_longitude"},
          {"pickup_lat", "Pickup_latitude"},
          {"dropoff_lon", "Dropoff_longitude"},
          {"dropoff_lat", "Dropoff_latitude"},
          {"passenger_count", "Passenger_count"},
          {"trip_distance", "Trip_distance"},
          {"fare_amount", "Fare_amount"},
          {"extra", "Extra"},
          {"mta_tax", "MTA_tax"},
          {"tip_amount", "Tip_amount"},
          {"toll_amount", "Tolls_amount"},
          {"ehail_fee", "Ehail_fee"},
          {"surcharge", "improvement_surcharge"},
          {"total_amount", "Total_amount"},
          {"pay_type", "Payment_type"},
          {"trip_type", "Trip_type"}};
}

SchemaMap parse_schema_map(std::string_view text) {
  SchemaMap map = default_schema_map();
  const auto& known = canonical_trip_fields();
  std::istringstream in{std::string(text)};
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    std::string_view v = line;
    if (const auto hash = v.find('#'); hash != std::string_view::npos) v = v.substr(0, hash);
    v = trim(v);
    if (v.empty()) continue;
    const auto eq = v.find('=');
    if (eq == std::string_view::npos) {
      throw SchemaError("schema map line " + std::to_string(line_no) + ": expected key=value");
    }
    const std::string key{trim(v.substr(0, eq))};
    const std::string value{trim(v.substr(eq + 1))};
    if (std::find(known.begin(), known.end(), key) == known.end()) {
      throw SchemaError("schema map line " + std::to_string(line_no) + ": unknown field '" + key + "'");
    }
    map[key] = value;
  }
  return map;
}

SchemaMap load_schema_map(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open schema map " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_schema_map(ss.str());
}

// ---------------------------------------------------------------------------
// Loading

namespace {

const std::set<std::string> kMandatoryFields = {"pickup_time", "dropoff_time",    "pickup_lon",    "pickup_lat",
                                                "passenger_count", "trip_distance", "fare_amount", "total_amount"};

struct RowError {
  std::string reason;
};

double optional_number(std::string_view text) {
  text = trim(text);
  return text.empty() ? 0.0 : parse_double(text);
}

bool valid_lat(double v) { return std::isfinite(v) && v >= -90.0 && v <= 90.0; }
bool valid_lon(double v) { return std::isfinite(v) && v >= -180.0 && v <= 180.0; }

}  // namespace

LoadedTrips load_trips(const std::filesystem::path& path, const SchemaMap& schema) {
  const Table raw = read_csv(path);

  std::map<std::string, std::optional<std::size_t>> column;
  for (const auto& name : canonical_trip_fields()) {
    const auto it = schema.find(name);
    std::optional<std::size_t> idx;
    if (it != schema.end()) {
      for (std::size_t c = 0; c < raw.header.size(); ++c) {
        if (trim(raw.header[c]) == it->second) {
          idx = c;
          break;
        }
      }
    }
    if (!idx && kMandatoryFields.count(name)) {
      const std::string header = it == schema.end() ? name : it->second;
      throw SchemaError("missing mandatory column '" + header + "' (field " + name + ")");
    }
    column[name] = idx;
  }

  LoadedTrips out;
  for (const auto& row : raw.rows) {
    ++out.report.rows_read;
    const auto get = [&](const std::string& name) -> std::string_view {
      const auto idx = column.at(name);
      if (!idx) return {};
      if (*idx >= row.size()) {
        if (kMandatoryFields.count(name)) throw RowError{"short row"};
        return {};
      }
      return trim(row[*idx]);
    };
    try {
      TripRecord r;
      try {
        r.vendor_id = std::string(get("vendor_id"));
        r.pickup_time = parse_timestamp(get("pickup_time"));
        r.dropoff_time = parse_timestamp(get("dropoff_time"));
        r.store_flag = std::string(get("store_flag"));
        r.rate_code = std::string(get("rate_code"));
        r.pickup_lon = parse_double(get("pickup_lon"));
        r.pickup_lat = parse_double(get("pickup_lat"));
        r.dropoff_lon = optional_number(get("dropoff_lon"));
        r.dropoff_lat = optional_number(get("dropoff_lat"));
        r.passenger_count = static_cast<int>(parse_int(get("passenger_count")));
        r.trip_distance = parse_double(get("trip_distance"));
        r.fare_amount = parse_double(get("fare_amount"));
        r.extra = optional_number(get("extra"));
        r.mta_tax = optional_number(get("mta_tax"));
        r.tip_amount = optional_number(get("tip_amount"));
        r.toll_amount = optional_number(get("toll_amount"));
        r.ehail_fee = optional_number(get("ehail_fee"));
        r.surcharge = optional_number(get("surcharge"));
        r.total_amount = parse_double(get("total_amount"));
        r.pay_type = std::string(get("pay_type"));
        r.trip_type = std::string(get("trip_type"));
      } catch (const std::invalid_argument&) {
        throw RowError{"unparseable"};
      }
      if (r.pickup_lat == 0.0 && r.pickup_lon == 0.0) throw RowError{"missing pickup coordinates"};
      if (!valid_lat(r.pickup_lat) || !valid_lon(r.pickup_lon) || !valid_lat(r.dropoff_lat) ||
          !valid_lon(r.dropoff_lon)) {
        throw RowError{"coordinates out of range"};
      }
      if (r.dropoff_time < r.pickup_time) throw RowError{"dropoff before pickup"};
      if (r.total_amount < 0.0 || r.fare_amount < 0.0) throw RowError{"negative amount"};
      if (r.trip_distance < 0.0 || !std::isfinite(r.trip_distance)) throw RowError{"negative distance"};
      if (r.passenger_count < 0) throw RowError{"negative passenger count"};
      out.records.push_back(std::move(r));
    } catch (const RowError& e) {
      ++out.report.dropped;
      ++out.report.dropped_by_reason[e.reason];
    }
  }
  return out;
}

void write_trips(const std::filesystem::path& path, std::span<const TripRecord> records, const SchemaMap& schema) {
  Table t;
  for (const auto& name : canonical_trip_fields()) {
    const auto it = schema.find(name);
    t.header.push_back(it == schema.end() ? name : it->second);
  }
  for (const auto& r : records) {
    t.rows.push_back({r.vendor_id,
                      format_timestamp(r.pickup_time),
                      format_timestamp(r.dropoff_time),
                      r.store_flag,
                      r.rate_code,
                      format_double(r.pickup_lon),
                      format_double(r.pickup_lat),
                      format_double(r.dropoff_lon),
                      format_double(r.dropoff_lat),
                      std::to_string(r.passenger_count),
                      format_double(r.trip_distance),
                      format_double(r.fare_amount),
                      format_double(r.extra),
                      format_double(r.mta_tax),
                      format_double(r.tip_amount),
                      format_double(r.toll_amount),
                      format_double(r.ehail_fee),
                      format_double(r.surcharge),
                      format_double(r.total_amount),
                      r.pay_type,
                      r.trip_type});
  }
  write_csv(path, t);
}

// ---------------------------------------------------------------------------
// Features

namespace {

const std::vector<std::string> kPayTypes = {"1", "2", "3", "4", "5", "6"};
const std::vector<std::string> kTripTypes = {"1", "2"};

}  // namespace

const std::vector<std::string>& trip_feature_names() {
  static const std::vector<std::string> names = [] {
    std::vector<std::string> n = {"trip_distance", "passenger_count", "extra",      "mta_tax",
                                  "tip_amount",    "toll_amount",     "surcharge"};
    for (const auto& p : kPayTypes) n.push_back("pay_type_" + p);
    for (const auto& t : kTripTypes) n.push_back("trip_type_" + t);
    n.push_back("trip_duration_min");
    return n;
  }();
  return names;
}

std::vector<double> raw_trip_features(const TripRecord& r) {
  std::vector<double> row = {r.trip_distance, static_cast<double>(r.passenger_count),
                             r.extra,         r.mta_tax,
                             r.tip_amount,    r.toll_amount,
                             r.surcharge};
  for (const auto& p : kPayTypes) row.push_back(r.pay_type == p ? 1.0 : 0.0);
  for (const auto& t : kTripTypes) row.push_back(r.trip_type == t ? 1.0 : 0.0);
  row.push_back(r.duration_minutes());
  return row;
}

namespace {

NodeProblem make_node(const TripRecord& r, int node_id, const Standardization& stats) {
  const auto raw = raw_trip_features(r);
  NodeProblem node;
  node.node_id = node_id;
  node.features = Vector::Zero(static_cast<Eigen::Index>(raw.size()) + 1);
  for (std::size_t c = 0; c < raw.size(); ++c) {
    if (stats.retained[c]) node.features[static_cast<Eigen::Index>(c)] = (raw[c] - stats.mean[c]) / stats.stdev[c];
  }
  node.features[static_cast<Eigen::Index>(raw.size())] = 1.0;
  node.response = r.total_amount;
  node.pickup_lat = r.pickup_lat;
  node.pickup_lon = r.pickup_lon;
  node.pickup_time = r.pickup_time;
  require_finite(node.features, "node features");
  if (!std::isfinite(node.response)) throw std::invalid_argument("node response is not finite");
  return node;
}

}  // namespace

Featurized featurize(std::span<const TripRecord> records) {
  if (records.empty()) throw std::invalid_argument("featurize: no records");
  const auto& names = trip_feature_names();
  const std::size_t cols = names.size();
  const double n = static_cast<double>(records.size());

  std::vector<std::vector<double>> raw;
  raw.reserve(records.size());
  for (const auto& r : records) raw.push_back(raw_trip_features(r));

  Featurized out;
  out.stats.names = names;
  out.stats.mean.assign(cols, 0.0);
  out.stats.stdev.assign(cols, 0.0);
  out.stats.retained.assign(cols, false);
  for (std::size_t c = 0; c < cols; ++c) {
    double sum = 0.0;
    for (const auto& row : raw) sum += row[c];
    const double mean = sum / n;
    double ss = 0.0;
    for (const auto& row : raw) ss += (row[c] - mean) * (row[c] - mean);
    const double sd = std::sqrt(ss / n);
    out.stats.mean[c] = mean;
    out.stats.stdev[c] = sd;
    out.stats.retained[c] = sd > 1e-12 * std::max(1.0, std::abs(mean));
    if (!out.stats.retained[c]) out.report.push_back("excluded zero-variance column: " + names[c]);
  }

  out.nodes.reserve(records.size());
  for (std::size_t i = 0; i < records.size(); ++i) {
    out.nodes.push_back(make_node(records[i], static_cast<int>(i), out.stats));
  }
  return out;
}

std::vector<NodeProblem> featurize(std::span<const TripRecord> records, const Standardization& stats) {
  if (stats.size() != trip_feature_names().size()) {
    throw std::invalid_argument("featurize: standardization has the wrong number of columns");
  }
  std::vector<NodeProblem> out;
  out.reserve(records.size());
  for (std::size_t i = 0; i < records.size(); ++i) {
    out.push_back(make_node(records[i], static_cast<int>(i), stats));
  }
  return out;
}

// ---------------------------------------------------------------------------
// Sampling

DatasetSplit split_train_test(std::span<const NodeProblem> problems, std::size_t train_count,
                              std::size_t test_count, const std::optional<HourWeights>& arrival_weights,
                              std::uint64_t seed) {
  if (train_count + test_count > problems.size()) {
    throw std::invalid_argument("split: requested " + std::to_string(train_count + test_count) + " nodes but only " +
                                std::to_string(problems.size()) + " available");
  }
  std::mt19937_64 rng(seed);
  std::vector<bool> taken(problems.size(), false);
  DatasetSplit split;

  if (arrival_weights) {
    for (double w : *arrival_weights) {
      if (!(w >= 0.0) || !std::isfinite(w)) throw std::invalid_argument("split: arrival weights must be finite and >= 0");
    }
    std::array<std::vector<std::size_t>, 24> pools;
    for (std::size_t i = 0; i < problems.size(); ++i) pools[hour_of_day(problems[i].pickup_time)].push_back(i);
    for (std::size_t t = 0; t < test_count; ++t) {
      double total = 0.0;
      for (int h = 0; h < 24; ++h) {
        if (!pools[h].empty()) total += (*arrival_weights)[h];
      }
      if (!(total > 0.0)) throw std::invalid_argument("split: not enough nodes in hours with positive weight");
      const double target = std::uniform_real_distribution<double>(0.0, total)(rng);
      int hour = -1;
      double acc = 0.0;
      for (int h = 0; h < 24; ++h) {
        if (pools[h].empty() || (*arrival_weights)[h] <= 0.0) continue;
        hour = h;
        acc += (*arrival_weights)[h];
        if (target < acc) break;
      }
      auto& pool = pools[hour];
      const std::size_t pick = std::uniform_int_distribution<std::size_t>(0, pool.size() - 1)(rng);
      const std::size_t idx = pool[pick];
      pool[pick] = pool.back();
      pool.pop_back();
      taken[idx] = true;
      split.test.push_back(problems[idx]);
    }
  }

  std::vector<std::size_t> rest;
  for (std::size_t i = 0; i < problems.size(); ++i) {
    if (!taken[i]) rest.push_back(i);
  }
  // partial Fisher-Yates: test (when unweighted) then train
  const std::size_t uniform_test = arrival_weights ? 0 : test_count;
  const std::size_t draws = uniform_test + train_count;
  for (std::size_t i = 0; i < draws; ++i) {
    const std::size_t j = std::uniform_int_distribution<std::size_t>(i, rest.size() - 1)(rng);
    std::swap(rest[i], rest[j]);
    if (i < uniform_test) {
      split.test.push_back(problems[rest[i]]);
    } else {
      split.train.push_back(problems[rest[i]]);
    }
  }
  return split;
}

HourWeights hourly_counts(std::span<const TripRecord> records) {
  HourWeights w{};
  for (const auto& r : records) w[hour_of_day(r.pickup_time)] += 1.0;
  return w;
}

// ---------------------------------------------------------------------------
// Synthetic data

SyntheticLasso generate_synthetic_lasso(int n, int d, double density, double noise_sigma, std::uint64_t seed,
                                        double truth_density) {
  if (n < 1 || d < 1) throw std::invalid_argument("synthetic lasso: n and d must be >= 1");
  if (!(density > 0.0 && density <= 1.0)) throw std::invalid_argument("synthetic lasso: density must be in (0, 1]");
  if (!(truth_density > 0.0 && truth_density <= 1.0)) {
    throw std::invalid_argument("synthetic lasso: truth density must be in (0, 1]");
  }
  if (!(noise_sigma >= 0.0)) throw std::invalid_argument("synthetic lasso: noise sigma must be >= 0");

  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::bernoulli_distribution keep(density);
  std::bernoulli_distribution keep_truth(truth_density);

  SyntheticLasso out;
  out.problem.a = DenseMatrix::Zero(n, d);
  for (int j = 0; j < d; ++j) {
    for (int i = 0; i < n; ++i) {
      if (keep(rng)) out.problem.a(i, j) = normal(rng);
    }
  }
  out.x_true = Vector::Zero(d);
  for (int j = 0; j < d; ++j) {
    if (keep_truth(rng)) out.x_true[j] = normal(rng);
  }
  out.problem.b = out.problem.a * out.x_true;
  if (noise_sigma > 0.0) {
    for (int i = 0; i < n; ++i) out.problem.b[i] += noise_sigma * normal(rng);
  }
  return out;
}

double ride_utility(const SyntheticRide& ride, const RideCoefficients& c) {
  return c[0] * ride.ratings + c[1] * ride.preferences + c[2] * ride.pickup_time_flag + c[3] * ride.pickup_loc -
         c[4] * ride.cost;
}

std::vector<SyntheticRide> generate_synthetic_rides(int m, const RideCoefficients& coeffs, double noise_sigma,
                                                    std::uint64_t seed) {
  if (m < 1) throw std::invalid_argument("synthetic rides: m must be >= 1");
  if (!(noise_sigma >= 0.0)) throw std::invalid_argument("synthetic rides: noise sigma must be >= 0");
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<int> one_to_ten(1, 10);
  std::uniform_int_distribution<int> flag(0, 1);
  std::uniform_real_distribution<double> loc(0.0, 30.0);
  std::uniform_real_distribution<double> cost(0.0, 1.0);
  std::normal_distribution<double> noise(0.0, 1.0);

  std::vector<SyntheticRide> rides(static_cast<std::size_t>(m));
  for (auto& r : rides) {
    r.ratings = one_to_ten(rng);
    r.preferences = one_to_ten(rng);
    r.pickup_time_flag = flag(rng);
    r.pickup_loc = loc(rng);
    r.cost = cost(rng);
    r.utility = ride_utility(r, coeffs);
    if (noise_sigma > 0.0) r.utility += noise_sigma * noise(rng);
  }
  return rides;
}

LassoProblem rides_to_lasso(std::span<const SyntheticRide> rides, double lambda) {
  LassoProblem p;
  p.a.resize(static_cast<Eigen::Index>(rides.size()), 5);
  p.b.resize(static_cast<Eigen::Index>(rides.size()));
  for (std::size_t i = 0; i < rides.size(); ++i) {
    const auto row = static_cast<Eigen::Index>(i);
    p.a(row, 0) = rides[i].ratings;
    p.a(row, 1) = rides[i].preferences;
    p.a(row, 2) = rides[i].pickup_time_flag;
    p.a(row, 3) = rides[i].pickup_loc;
    p.a(row, 4) = rides[i].cost;
    p.b[row] = rides[i].utility;
  }
  p.lambda = lambda;
  return p;
}

}  // namespace netlasso

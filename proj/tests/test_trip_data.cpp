#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "oracles.hpp"
#include "test_util.hpp"

#include "netlasso/trip_data.hpp"

#include <algorithm>
#include <numeric>
#include <set>

using namespace netlasso;
using testutil::kGreenHeader;
using testutil::TempDir;
using testutil::write_text;

namespace {

const std::filesystem::path kData = FIXTURE_DIR;

// A well-formed row; pieces can be swapped in by the caller.
std::string row(const std::string& pickup = "2015-01-06 08:15:00", const std::string& lon = "-73.95",
                const std::string& lat = "40.71", const std::string& total = "12.30", const std::string& dist = "2.10") {
  return "2," + pickup + ",2015-01-06 08:31:00,N,1," + lon + "," + lat + ",-73.93,40.73,1," + dist +
         ",10.00,0.5,0.5,1.00,0,,0.3," + total + ",1,1\n";
}

TripRecord record_at(const std::string& pickup, double distance = 2.0) {
  TripRecord r;
  r.pickup_time = parse_timestamp(pickup);
  r.dropoff_time = r.pickup_time + std::chrono::minutes(12);
  r.pickup_lat = 40.7;
  r.pickup_lon = -73.9;
  r.passenger_count = 1;
  r.trip_distance = distance;
  r.fare_amount = 10.0;
  r.total_amount = 12.0;
  r.pay_type = "1";
  r.trip_type = "1";
  return r;
}

std::vector<NodeProblem> nodes_with_hours(int count, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::vector<NodeProblem> out;
  for (int i = 0; i < count; ++i) {
    NodeProblem n;
    n.node_id = i;
    n.features = Vector::Ones(1);
    const int hour = static_cast<int>(rng() % 24);
    n.pickup_time = parse_timestamp("2015-01-01 00:00:00") + std::chrono::hours(hour);
    out.push_back(n);
  }
  return out;
}

}  // namespace

// ---- timestamps --------------------------------------------------------------

TEST_CASE("timestamps") {
  const auto t = parse_timestamp("2015-01-27 17:45:09");
  CHECK(format_timestamp(t) == "2015-01-27 17:45:09");
  CHECK(parse_timestamp("2015-01-27T17:45:09") == t);
  CHECK(hour_of_day(t) == 17);
  CHECK(day_of_month(t) == 27);
  CHECK(weekday_index(t) == 1);                                     // Tuesday
  CHECK(weekday_index(parse_timestamp("2015-01-01 00:00:00")) == 3);  // Thursday
  CHECK_THROWS(parse_timestamp("2015-13-01 00:00:00"));
  CHECK_THROWS(parse_timestamp("2015-01-01"));
  CHECK_THROWS(parse_timestamp("yesterday"));
}

// ---- loading -------------------------------------------------------------------

TEST_CASE("three well-formed rows load without drops") {
  TempDir dir("trips");
  write_text(dir / "t.csv", kGreenHeader + row() + row("2015-01-06 07:00:00") + row("2015-01-06 08:00:00"));
  const auto loaded = load_trips(dir / "t.csv");
  CHECK(loaded.records.size() == 3);
  CHECK(loaded.report.rows_read == 3);
  CHECK(loaded.report.dropped == 0);
  const auto& r = loaded.records.front();
  CHECK(r.pickup_lat == 40.71);
  CHECK(r.trip_distance == 2.1);
  CHECK(r.ehail_fee == 0.0);  // blank, imputed
  CHECK(r.duration_minutes() == 16.0);
}

TEST_CASE("a row at (0,0) is dropped and counted") {
  TempDir dir("trips");
  write_text(dir / "t.csv", kGreenHeader + row() + row("2015-01-06 08:15:00", "0", "0") + row());
  const auto loaded = load_trips(dir / "t.csv");
  CHECK(loaded.records.size() == 2);
  CHECK(loaded.report.dropped == 1);
  CHECK(loaded.report.dropped_by_reason.at("missing pickup coordinates") == 1);
}

TEST_CASE("invalid rows are counted by reason") {
  TempDir dir("trips");
  write_text(dir / "t.csv", kGreenHeader + row() + row("not a time") + row("2015-01-06 08:15:00", "-73.95", "95") +
                                row("2015-01-06 08:15:00", "-73.95", "40.71", "-3.00") +
                                row("2015-01-06 08:15:00", "-73.95", "40.71", "12.30", "-1") +
                                row("2015-01-06 08:40:00") + "2,2015-01-06 08:15:00\n");
  const auto loaded = load_trips(dir / "t.csv");
  CHECK(loaded.records.size() == 1);
  CHECK(loaded.report.rows_read == 7);
  CHECK(loaded.report.dropped == 6);
  const auto& why = loaded.report.dropped_by_reason;
  CHECK(why.at("unparseable") == 1);
  CHECK(why.at("coordinates out of range") == 1);
  CHECK(why.at("negative amount") == 1);
  CHECK(why.at("negative distance") == 1);
  CHECK(why.at("dropoff before pickup") == 1);
  CHECK(why.at("short row") == 1);
}

TEST_CASE("missing mandatory column names the column") {
  TempDir dir("trips");
  std::string header = kGreenHeader;
  header.replace(header.find("Total_amount"), 12, "Grand_total");
  write_text(dir / "t.csv", header + row());
  try {
    load_trips(dir / "t.csv");
    FAIL("expected SchemaError");
  } catch (const SchemaError& e) {
    CHECK(std::string(e.what()).find("Total_amount") != std::string::npos);
  }
}

TEST_CASE("schema map file overrides headers") {
  TempDir dir("trips");
  std::string header = kGreenHeader;
  header.replace(header.find("Total_amount"), 12, "Grand_total");
  write_text(dir / "t.csv", header + row());
  write_text(dir / "schema.txt", "# 2016 style header\ntotal_amount = Grand_total\n\n");
  const auto schema = load_schema_map(dir / "schema.txt");
  CHECK(schema.at("total_amount") == "Grand_total");
  CHECK(schema.at("fare_amount") == "Fare_amount");
  CHECK(load_trips(dir / "t.csv", schema).records.size() == 1);

  CHECK_THROWS_AS(parse_schema_map("no_such_field=X\n"), SchemaError);
  CHECK_THROWS_AS(parse_schema_map("just text\n"), SchemaError);
}

TEST_CASE("write_trips and load_trips round-trip") {
  TempDir dir("trips");
  const auto original = load_trips(kData / "green_200.csv").records;
  REQUIRE(original.size() == 200);
  write_trips(dir / "copy.csv", original);
  const auto again = load_trips(dir / "copy.csv");
  CHECK(again.report.dropped == 0);
  REQUIRE(again.records.size() == original.size());
  for (std::size_t i = 0; i < original.size(); ++i) CHECK(again.records[i] == original[i]);
}

// ---- features ------------------------------------------------------------------

TEST_CASE("feature layout excludes fare_amount") {
  const auto& names = trip_feature_names();
  CHECK(std::find(names.begin(), names.end(), "fare_amount") == names.end());
  CHECK(names.front() == "trip_distance");
  CHECK(names.back() == "trip_duration_min");
  CHECK(raw_trip_features(record_at("2015-01-06 08:00:00")).size() == names.size());
}

TEST_CASE("single record standardizes to zeros plus intercept") {
  const std::vector<TripRecord> one = {record_at("2015-01-06 08:00:00")};
  const auto f = featurize(one);
  REQUIRE(f.nodes.size() == 1);
  const auto& x = f.nodes[0].features;
  CHECK(x.size() == static_cast<Eigen::Index>(trip_feature_names().size() + 1));
  CHECK(x.head(x.size() - 1) == Vector::Zero(x.size() - 1));
  CHECK(x[x.size() - 1] == 1.0);
  CHECK(f.report.size() == trip_feature_names().size());
  CHECK(f.nodes[0].response == 12.0);
}

TEST_CASE("two records differing only in distance") {
  const std::vector<TripRecord> two = {record_at("2015-01-06 08:00:00", 1.0), record_at("2015-01-06 08:00:00", 3.0)};
  const auto f = featurize(two);
  const auto& a = f.nodes[0].features;
  const auto& b = f.nodes[1].features;
  CHECK(a[0] == -1.0);
  CHECK(b[0] == 1.0);
  for (Eigen::Index i = 1; i + 1 < a.size(); ++i) {
    CHECK(a[i] == 0.0);
    CHECK(b[i] == 0.0);
  }
  CHECK(f.stats.retained[0]);
  CHECK_FALSE(f.stats.retained[1]);
}

TEST_CASE("standardized columns have mean 0 and stdev 1") {
  const auto recs = load_trips(kData / "green_200.csv").records;
  const auto f = featurize(recs);
  const auto n = static_cast<double>(f.nodes.size());
  for (std::size_t c = 0; c < f.stats.size(); ++c) {
    if (!f.stats.retained[c]) continue;
    double sum = 0, sq = 0;
    for (const auto& node : f.nodes) sum += node.features[static_cast<Eigen::Index>(c)];
    const double mean = sum / n;
    for (const auto& node : f.nodes) sq += std::pow(node.features[static_cast<Eigen::Index>(c)] - mean, 2);
    CAPTURE(f.stats.names[c]);
    CHECK(std::abs(mean) <= 1e-9);
    CHECK(std::abs(std::sqrt(sq / n) - 1.0) <= 1e-9);
  }
  // the fixture has constant mta_tax and surcharge
  CHECK(std::count(f.stats.retained.begin(), f.stats.retained.end(), false) >= 2);
}

TEST_CASE("applying saved statistics reproduces the fitted features") {
  const auto recs = load_trips(kData / "green_200.csv").records;
  const auto f = featurize(recs);
  const auto again = featurize(recs, f.stats);
  REQUIRE(again.size() == f.nodes.size());
  for (std::size_t i = 0; i < again.size(); ++i) CHECK(again[i].features == f.nodes[i].features);
  Standardization wrong = f.stats;
  wrong.names.pop_back();
  wrong.mean.pop_back();
  wrong.stdev.pop_back();
  wrong.retained.pop_back();
  CHECK_THROWS_AS(featurize(recs, wrong), std::invalid_argument);
}

// ---- sampling ------------------------------------------------------------------

TEST_CASE("uniform split gives disjoint sets of the requested size") {
  const auto nodes = nodes_with_hours(100, 1);
  const auto split = split_train_test(nodes, 10, 5, std::nullopt, 99);
  CHECK(split.train.size() == 10);
  CHECK(split.test.size() == 5);
  std::set<int> ids;
  for (const auto& n : split.train) ids.insert(n.node_id);
  for (const auto& n : split.test) ids.insert(n.node_id);
  CHECK(ids.size() == 15);
  CHECK_THROWS_AS(split_train_test(nodes, 90, 20, std::nullopt, 1), std::invalid_argument);
}

TEST_CASE("split is disjoint for every seed") {
  const auto nodes = nodes_with_hours(60, 2);
  HourWeights w{};
  for (int h = 0; h < 24; ++h) w[static_cast<std::size_t>(h)] = 1.0 + h % 5;
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    for (const auto& weights : {std::optional<HourWeights>{}, std::optional<HourWeights>{w}}) {
      const auto split = split_train_test(nodes, 30, 20, weights, seed);
      std::set<int> train, test;
      for (const auto& n : split.train) train.insert(n.node_id);
      for (const auto& n : split.test) test.insert(n.node_id);
      CHECK(train.size() == 30);
      CHECK(test.size() == 20);
      for (int id : test) CHECK(train.count(id) == 0);
    }
  }
}

TEST_CASE("split is deterministic for a seed") {
  const auto nodes = nodes_with_hours(50, 3);
  const auto a = split_train_test(nodes, 20, 10, std::nullopt, 7);
  const auto b = split_train_test(nodes, 20, 10, std::nullopt, 7);
  for (std::size_t i = 0; i < a.train.size(); ++i) CHECK(a.train[i].node_id == b.train[i].node_id);
  for (std::size_t i = 0; i < a.test.size(); ++i) CHECK(a.test[i].node_id == b.test[i].node_id);
}

TEST_CASE("weights concentrated on one hour") {
  const auto nodes = nodes_with_hours(200, 4);
  HourWeights w{};
  w[19] = 1.0;
  const auto available = std::count_if(nodes.begin(), nodes.end(), [](const NodeProblem& n) { return hour_of_day(n.pickup_time) == 19; });
  REQUIRE(available >= 3);
  const auto split = split_train_test(nodes, 50, 3, w, 5);
  for (const auto& n : split.test) CHECK(hour_of_day(n.pickup_time) == 19);
}

TEST_CASE("weighted test sample follows the hourly weights (chi-square, 0.01 level)") {
  // Each hour holds plenty of nodes so the draw is not depleted.
  std::vector<NodeProblem> nodes;
  for (int h = 0; h < 24; ++h) {
    for (int i = 0; i < 200; ++i) {
      NodeProblem n;
      n.node_id = h * 200 + i;
      n.features = Vector::Ones(1);
      n.pickup_time = parse_timestamp("2015-01-02 00:00:00") + std::chrono::hours(h);
      nodes.push_back(n);
    }
  }
  const auto recs = load_trips(kData / "green_200.csv").records;
  const HourWeights w = hourly_counts(recs);
  const double total_w = std::accumulate(w.begin(), w.end(), 0.0);

  const auto split = split_train_test(nodes, 0, 500, w, 2015);
  std::array<int, 24> observed{};
  for (const auto& n : split.test) ++observed[static_cast<std::size_t>(hour_of_day(n.pickup_time))];
  double chi2 = 0.0;
  int cells = 0;
  for (int h = 0; h < 24; ++h) {
    const double expected = 500.0 * w[static_cast<std::size_t>(h)] / total_w;
    if (expected == 0.0) {
      CHECK(observed[static_cast<std::size_t>(h)] == 0);
      continue;
    }
    chi2 += std::pow(observed[static_cast<std::size_t>(h)] - expected, 2) / expected;
    ++cells;
  }
  CAPTURE(chi2);
  CHECK(chi2 < oracle::chi2_critical_01(cells - 1));
}

// ---- statistics ------------------------------------------------------------------

TEST_CASE("weekday histogram for one Tuesday record") {
  const std::vector<TripRecord> one = {record_at("2015-01-06 08:00:00")};
  const Table t = emit_stats(one, StatsKind::kWeekdayHist);
  CHECK(t.header == std::vector<std::string>{"weekday", "count"});
  REQUIRE(t.rows.size() == 7);
  for (const auto& r : t.rows) CHECK(r[1] == (r[0] == "Tuesday" ? "1" : "0"));
}

TEST_CASE("statistics tables on the fixture") {
  const auto recs = load_trips(kData / "green_200.csv").records;

  const Table hours = emit_stats(recs, StatsKind::kHourHist);
  REQUIRE(hours.rows.size() == 24);
  long long sum = 0;
  for (const auto& r : hours.rows) sum += parse_int(r[1]);
  CHECK(sum == 200);

  const Table days = emit_stats(recs, StatsKind::kDayOfMonthHist);
  REQUIRE(days.rows.size() == 31);
  const auto count = [&](int day) { return parse_int(days.rows[static_cast<std::size_t>(day - 1)][1]); };
  for (int d = 1; d <= 31; ++d) {
    if (d != 27) CHECK(count(27) < count(d));  // the fixture mimics the snowstorm dip
  }

  const Table pairs = emit_stats(recs, StatsKind::kPickupDropoffPairs);
  CHECK(pairs.header == std::vector<std::string>{"pickup_time", "dropoff_time", "pickup_hour", "dropoff_hour"});
  CHECK(pairs.rows.size() == 200);

  const DenseMatrix corr = feature_correlation(recs);
  CHECK(corr == corr.transpose());
  CHECK((corr.diagonal().array() == 1.0).all());
  CHECK((corr.array().abs() <= 1.0).all());
  const auto& names = correlation_feature_names();
  const auto idx = [&](const char* n) { return std::find(names.begin(), names.end(), n) - names.begin(); };
  CHECK(corr(idx("fare_amount"), idx("trip_distance")) > 0.5);

  const std::vector<TripRecord> first100(recs.begin(), recs.begin() + 100);
  CHECK(feature_correlation(first100)(idx("fare_amount"), idx("trip_distance")) > 0.5);

  for (StatsKind k : all_stats_kinds()) CHECK(parse_stats_kind(stats_kind_name(k)) == k);
  CHECK_THROWS(parse_stats_kind("histogram"));
}

// ---- synthetic data ------------------------------------------------------------------

TEST_CASE("synthetic Lasso problem at the reference size") {
  const auto s = generate_synthetic_lasso(1500, 5000, 0.02, std::sqrt(1e-3), 1);
  const auto nnz = (s.problem.a.array() != 0.0).count();
  CHECK(nnz >= 142500);
  CHECK(nnz <= 157500);
  CHECK(s.problem.b.size() == 1500);
  CHECK((s.x_true.array() != 0.0).count() > 0);
}

TEST_CASE("synthetic Lasso is seed-deterministic") {
  const auto a = generate_synthetic_lasso(50, 80, 0.1, 0.01, 77);
  const auto b = generate_synthetic_lasso(50, 80, 0.1, 0.01, 77);
  const auto c = generate_synthetic_lasso(50, 80, 0.1, 0.01, 78);
  CHECK(a.problem.a == b.problem.a);
  CHECK(a.problem.b == b.problem.b);
  CHECK(a.problem.a != c.problem.a);
}

TEST_CASE("noiseless overdetermined problem is recovered at lambda = 0") {
  auto s = generate_synthetic_lasso(60, 30, 1.0, 0.0, 5, 1.0);
  s.problem.lambda = 0.0;
  AdmmConfig cfg;
  cfg.eps_abs = 1e-12;
  cfg.eps_rel = 1e-12;
  cfg.max_iters = 20000;
  const auto sol = solve_lasso(s.problem, cfg);
  CHECK((sol.z - s.x_true).norm() <= 1e-6);
}

TEST_CASE("synthetic rides") {
  SUBCASE("cost-only utility") {
    for (const auto& r : generate_synthetic_rides(50, {0, 0, 0, 0, 1}, 0.0, 1)) CHECK(r.utility == -r.cost);
  }
  SUBCASE("arithmetic") {
    SyntheticRide r;
    r.ratings = 10;
    r.preferences = 10;
    r.pickup_time_flag = 1;
    r.pickup_loc = 30;
    r.cost = 1;
    CHECK(ride_utility(r, {1, 1, 1, 1, 1}) == 50.0);
  }
  SUBCASE("ranges") {
    for (const auto& r : generate_synthetic_rides(500, {1, 2, 3, 4, 5}, 0.5, 2)) {
      CHECK(r.ratings >= 1);
      CHECK(r.ratings <= 10);
      CHECK(r.preferences >= 1);
      CHECK(r.preferences <= 10);
      CHECK((r.pickup_time_flag == 0 || r.pickup_time_flag == 1));
      CHECK(r.pickup_loc >= 0.0);
      CHECK(r.pickup_loc <= 30.0);
      CHECK(r.cost >= 0.0);
      CHECK(r.cost <= 1.0);
    }
  }
  SUBCASE("lasso recovers the coefficient signs") {
    const RideCoefficients coeffs = {0.8, 0.5, 1.5, 0.2, 2.0};
    const auto rides = generate_synthetic_rides(2000, coeffs, 0.0, 3);
    const auto prob = rides_to_lasso(rides, 1.0);
    // least squares on the noiseless system
    const Vector ls = prob.a.colPivHouseholderQr().solve(prob.b);
    AdmmConfig cfg;
    cfg.eps_abs = 1e-10;
    cfg.eps_rel = 1e-10;
    cfg.max_iters = 20000;
    const auto sol = solve_lasso(prob, cfg);
    for (int i = 0; i < 5; ++i) {
      const double expected = i == 4 ? -coeffs[4] : coeffs[static_cast<std::size_t>(i)];
      CHECK(ls[i] == doctest::Approx(expected).epsilon(1e-9));
      CHECK((sol.z[i] > 0) == (expected > 0));
    }
    CHECK(sol.z[4] < 0);
  }
}

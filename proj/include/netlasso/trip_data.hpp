#pragma once

#include "netlasso/csv.hpp"
#include "netlasso/lasso_admm.hpp"
#include "netlasso/numerics.hpp"

#include <array>
#include <chrono>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace netlasso {

/// Naive wall-clock time (no timezone), seconds resolution. The epoch is only
/// used for calendar arithmetic.
using Timestamp = std::chrono::sys_seconds;

/// "YYYY-MM-DD HH:MM:SS" (a 'T' separator is also accepted).
Timestamp parse_timestamp(std::string_view text);
std::string format_timestamp(Timestamp t);
int hour_of_day(Timestamp t);
int day_of_month(Timestamp t);
/// 0 = Monday ... 6 = Sunday.
int weekday_index(Timestamp t);

/// One green-taxi trip row.
struct TripRecord {
  std::string vendor_id;
  Timestamp pickup_time{};
  Timestamp dropoff_time{};
  std::string store_flag;
  std::string rate_code;
  double pickup_lon = 0.0;
  double pickup_lat = 0.0;
  double dropoff_lon = 0.0;
  double dropoff_lat = 0.0;
  int passenger_count = 0;
  double trip_distance = 0.0;  // miles
  double fare_amount = 0.0;
  double extra = 0.0;
  double mta_tax = 0.0;
  double tip_amount = 0.0;
  double toll_amount = 0.0;
  double ehail_fee = 0.0;
  double surcharge = 0.0;
  double total_amount = 0.0;
  std::string pay_type;
  std::string trip_type;

  double duration_minutes() const;
  bool operator==(const TripRecord&) const = default;
};

class SchemaError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// canonical field name -> CSV header text.
using SchemaMap = std::map<std::string, std::string>;

/// Canonical names in output column order.
const std::vector<std::string>& canonical_trip_fields();
/// Headers of the 2015 green-taxi trip files.
SchemaMap default_schema_map();
/// Parses `canonical_name=csv_header` lines ('#' starts a comment) on top of
/// the defaults. Unknown canonical names are rejected.
SchemaMap parse_schema_map(std::string_view text);
SchemaMap load_schema_map(const std::filesystem::path& path);

struct LoadReport {
  std::size_t rows_read = 0;
  std::size_t dropped = 0;
  std::map<std::string, std::size_t> dropped_by_reason;
};

struct LoadedTrips {
  std::vector<TripRecord> records;
  LoadReport report;
};

/// Rows that fail to parse or violate TripRecord invariants are dropped and
/// counted. A missing mandatory column throws SchemaError.
LoadedTrips load_trips(const std::filesystem::path& path, const SchemaMap& schema = default_schema_map());
void write_trips(const std::filesystem::path& path, std::span<const TripRecord> records,
                 const SchemaMap& schema = default_schema_map());

/// Per-node regression datum. `features` ends with the intercept 1.
struct NodeProblem {
  int node_id = 0;
  Vector features;
  double response = 0.0;
  double pickup_lat = 0.0;
  double pickup_lon = 0.0;
  Timestamp pickup_time{};
};

/// Column statistics fitted on a training set and reused for test data.
/// Columns with zero variance stay in the layout but always map to 0.
struct Standardization {
  std::vector<std::string> names;
  std::vector<double> mean;
  std::vector<double> stdev;
  std::vector<bool> retained;

  std::size_t size() const { return names.size(); }
};

struct Featurized {
  std::vector<NodeProblem> nodes;
  Standardization stats;
  std::vector<std::string> report;
};

/// Regression feature names, excluding the trailing intercept.
const std::vector<std::string>& trip_feature_names();
/// Raw (unstandardized) feature row for one record, intercept excluded.
std::vector<double> raw_trip_features(const TripRecord& r);

/// Fits standardization on `records`; node ids are positions in `records`.
Featurized featurize(std::span<const TripRecord> records);
/// Applies existing statistics; node ids are positions in `records`.
std::vector<NodeProblem> featurize(std::span<const TripRecord> records, const Standardization& stats);

struct DatasetSplit {
  std::vector<NodeProblem> train;
  std::vector<NodeProblem> test;
};

using HourWeights = std::array<double, 24>;

/// Test nodes are drawn first, hour by hour in proportion to `arrival_weights`
/// (uniformly without weights); training nodes are then drawn uniformly from
/// the rest. Output order follows draw order.
DatasetSplit split_train_test(std::span<const NodeProblem> problems, std::size_t train_count,
                              std::size_t test_count, const std::optional<HourWeights>& arrival_weights,
                              std::uint64_t seed);

HourWeights hourly_counts(std::span<const TripRecord> records);

enum class StatsKind { kWeekdayHist, kHourHist, kDayOfMonthHist, kPickupDropoffPairs, kFeatureCorrelation };

const std::vector<StatsKind>& all_stats_kinds();
std::string stats_kind_name(StatsKind kind);
StatsKind parse_stats_kind(std::string_view name);

/// Plot-ready table for one descriptive statistic.
Table emit_stats(std::span<const TripRecord> records, StatsKind kind);

/// Numeric columns used by the correlation table (fare_amount included).
const std::vector<std::string>& correlation_feature_names();
/// Symmetric Pearson matrix; zero-variance columns correlate 0 off-diagonal.
DenseMatrix feature_correlation(std::span<const TripRecord> records);

// ---------------------------------------------------------------------------
// Synthetic data

struct SyntheticLasso {
  LassoProblem problem;
  Vector x_true;
};

/// A is Bernoulli(density)-masked standard normal; x_true has a fraction
/// `truth_density` of standard-normal entries; b = A x_true + N(0, sigma^2).
SyntheticLasso generate_synthetic_lasso(int n, int d, double density, double noise_sigma, std::uint64_t seed,
                                        double truth_density = 0.02);

struct SyntheticRide {
  int ratings = 1;           // [1, 10]
  int preferences = 1;       // [1, 10]
  int pickup_time_flag = 0;  // {0, 1}
  double pickup_loc = 0.0;   // [0, 30]
  double cost = 0.0;         // [0, 1]
  double utility = 0.0;
};

/// (a, b, c, d, e) in utility = a*ratings + b*preferences + c*time + d*loc - e*cost.
using RideCoefficients = std::array<double, 5>;

double ride_utility(const SyntheticRide& ride, const RideCoefficients& c);

std::vector<SyntheticRide> generate_synthetic_rides(int m, const RideCoefficients& coeffs, double noise_sigma,
                                                    std::uint64_t seed);

/// Lasso problem over the five regressors in the order above (no intercept);
/// the fitted cost weight estimates -e.
LassoProblem rides_to_lasso(std::span<const SyntheticRide> rides, double lambda);

}  // namespace netlasso

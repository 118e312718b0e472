#include "netlasso/trip_data.hpp"

#include <algorithm>
#include <array>
#include <cmath>

namespace netlasso {

namespace {

constexpr std::array<const char*, 7> kWeekdays = {"Monday", "Tuesday",  "Wednesday", "Thursday",
                                                  "Friday", "Saturday", "Sunday"};

std::vector<double> correlation_row(const TripRecord& r) {
  return {static_cast<double>(r.passenger_count),
          r.trip_distance,
          r.fare_amount,
          r.extra,
          r.mta_tax,
          r.tip_amount,
          r.toll_amount,
          r.ehail_fee,
          r.surcharge,
          r.total_amount,
          r.duration_minutes()};
}

Table count_table(std::string key, const std::vector<std::string>& labels, const std::vector<long long>& counts) {
  Table t;
  t.header = {std::move(key), "count"};
  for (std::size_t i = 0; i < labels.size(); ++i) t.rows.push_back({labels[i], std::to_string(counts[i])});
  return t;
}

double hours_since_midnight(Timestamp t, Timestamp day_start) {
  return static_cast<double>((t - day_start).count()) / 3600.0;
}

}  // namespace

const std::vector<StatsKind>& all_stats_kinds() {
  static const std::vector<StatsKind> kinds = {StatsKind::kWeekdayHist, StatsKind::kHourHist,
                                               StatsKind::kDayOfMonthHist, StatsKind::kPickupDropoffPairs,
                                               StatsKind::kFeatureCorrelation};
  return kinds;
}

std::string stats_kind_name(StatsKind kind) {
  switch (kind) {
    case StatsKind::kWeekdayHist: return "weekday_hist";
    case StatsKind::kHourHist: return "hour_hist";
    case StatsKind::kDayOfMonthHist: return "day_of_month_hist";
    case StatsKind::kPickupDropoffPairs: return "pickup_dropoff_pairs";
    case StatsKind::kFeatureCorrelation: return "feature_correlation";
  }
  return "unknown";
}

StatsKind parse_stats_kind(std::string_view name) {
  for (auto kind : all_stats_kinds()) {
    if (stats_kind_name(kind) == name) return kind;
  }
  throw std::invalid_argument("unknown statistic '" + std::string(name) + "'");
}

const std::vector<std::string>& correlation_feature_names() {
  static const std::vector<std::string> names = {
      "passenger_count", "trip_distance", "fare_amount", "extra",        "mta_tax",          "tip_amount",
      "toll_amount",     "ehail_fee",     "surcharge",   "total_amount", "trip_duration_min"};
  return names;
}

DenseMatrix feature_correlation(std::span<const TripRecord> records) {
  if (records.empty()) throw std::invalid_argument("feature_correlation: no records");
  const auto cols = static_cast<Eigen::Index>(correlation_feature_names().size());
  DenseMatrix data(static_cast<Eigen::Index>(records.size()), cols);
  for (std::size_t i = 0; i < records.size(); ++i) {
    const auto row = correlation_row(records[i]);
    for (Eigen::Index c = 0; c < cols; ++c) data(static_cast<Eigen::Index>(i), c) = row[static_cast<std::size_t>(c)];
  }
  const DenseMatrix centered = data.rowwise() - data.colwise().mean();
  const Vector norms = centered.colwise().norm();

  DenseMatrix corr = DenseMatrix::Identity(cols, cols);
  for (Eigen::Index a = 0; a < cols; ++a) {
    for (Eigen::Index b = a + 1; b < cols; ++b) {
      const double denom = norms[a] * norms[b];
      const double r = denom > 0.0 ? centered.col(a).dot(centered.col(b)) / denom : 0.0;
      corr(a, b) = corr(b, a) = std::clamp(r, -1.0, 1.0);
    }
  }
  return corr;
}

Table emit_stats(std::span<const TripRecord> records, StatsKind kind) {
  if (records.empty()) throw std::invalid_argument("emit_stats: no records");
  switch (kind) {
    case StatsKind::kWeekdayHist: {
      std::vector<long long> counts(7, 0);
      for (const auto& r : records) ++counts[static_cast<std::size_t>(weekday_index(r.pickup_time))];
      return count_table("weekday", {kWeekdays.begin(), kWeekdays.end()}, counts);
    }
    case StatsKind::kHourHist: {
      std::vector<long long> counts(24, 0);
      std::vector<std::string> labels;
      for (int h = 0; h < 24; ++h) labels.push_back(std::to_string(h));
      for (const auto& r : records) ++counts[static_cast<std::size_t>(hour_of_day(r.pickup_time))];
      return count_table("hour", labels, counts);
    }
    case StatsKind::kDayOfMonthHist: {
      std::vector<long long> counts(31, 0);
      std::vector<std::string> labels;
      for (int d = 1; d <= 31; ++d) labels.push_back(std::to_string(d));
      for (const auto& r : records) ++counts[static_cast<std::size_t>(day_of_month(r.pickup_time) - 1)];
      return count_table("day", labels, counts);
    }
    case StatsKind::kPickupDropoffPairs: {
      Table t;
      t.header = {"pickup_time", "dropoff_time", "pickup_hour", "dropoff_hour"};
      for (const auto& r : records) {
        const auto day_start = std::chrono::floor<std::chrono::days>(r.pickup_time);
        t.rows.push_back({format_timestamp(r.pickup_time), format_timestamp(r.dropoff_time),
                          format_double(hours_since_midnight(r.pickup_time, day_start)),
                          format_double(hours_since_midnight(r.dropoff_time, day_start))});
      }
      return t;
    }
    case StatsKind::kFeatureCorrelation: {
      const auto& names = correlation_feature_names();
      const DenseMatrix corr = feature_correlation(records);
      Table t;
      t.header.push_back("feature");
      t.header.insert(t.header.end(), names.begin(), names.end());
      for (std::size_t a = 0; a < names.size(); ++a) {
        std::vector<std::string> row = {names[a]};
        for (std::size_t b = 0; b < names.size(); ++b) {
          row.push_back(format_double(corr(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(b))));
        }
        t.rows.push_back(std::move(row));
      }
      return t;
    }
  }
  throw std::invalid_argument("emit_stats: unknown kind");
}

}  // namespace netlasso

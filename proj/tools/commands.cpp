#include "commands.hpp"

#include "netlasso/graph.hpp"
#include "netlasso/lasso_admm.hpp"
#include "netlasso/network_lasso.hpp"

#include <CLI11.hpp>
#include <json.hpp>
#include <openssl/evp.h>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <set>
#include <sstream>

namespace netlasso::cli {

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;

std::string sha256_hex(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read " + path.string());
  EVP_MD_CTX* ctx = EVP_MD_CTX_new();
  if (ctx == nullptr || EVP_DigestInit_ex(ctx, EVP_sha256(), nullptr) != 1) {
    EVP_MD_CTX_free(ctx);
    throw std::runtime_error("sha256: digest init failed");
  }
  char buf[1 << 15];
  while (in) {
    in.read(buf, sizeof buf);
    if (in.gcount() > 0) EVP_DigestUpdate(ctx, buf, static_cast<std::size_t>(in.gcount()));
  }
  unsigned char md[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  EVP_DigestFinal_ex(ctx, md, &len);
  EVP_MD_CTX_free(ctx);
  std::ostringstream hex;
  for (unsigned int i = 0; i < len; ++i) hex << std::hex << std::setw(2) << std::setfill('0') << static_cast<int>(md[i]);
  return hex.str();
}

std::vector<double> parse_lambda_list(const std::string& text, const std::string& field) {
  std::vector<double> out;
  std::string_view rest = text;
  while (true) {
    const auto comma = rest.find(',');
    const auto item = trim(rest.substr(0, comma));
    try {
      out.push_back(parse_double(item));
    } catch (const std::invalid_argument&) {
      throw ConfigError(field, "not a number: '" + std::string(item) + "'");
    }
    if (!std::isfinite(out.back()) || out.back() < 0.0) throw ConfigError(field, "values must be finite and >= 0");
    if (comma == std::string_view::npos) break;
    rest.remove_prefix(comma + 1);
  }
  return out;
}

std::vector<double> auto_lambda_grid(double level) {
  std::vector<double> grid = {0.0};
  if (!(level > 0.0)) return grid;
  for (int i = 0; i < 9; ++i) grid.push_back(level * std::pow(10.0, -3.0 + 5.0 * i / 8.0));
  return grid;
}

Table standardization_table(const Standardization& stats) {
  Table t;
  t.header = {"feature", "mean", "stdev", "retained"};
  for (std::size_t c = 0; c < stats.size(); ++c) {
    t.rows.push_back({stats.names[c], format_double(stats.mean[c]), format_double(stats.stdev[c]),
                      stats.retained[c] ? "1" : "0"});
  }
  return t;
}

Standardization parse_standardization_table(const Table& table) {
  if (table.header != std::vector<std::string>{"feature", "mean", "stdev", "retained"}) {
    throw std::invalid_argument("standardization table: expected header feature,mean,stdev,retained");
  }
  Standardization s;
  for (const auto& row : table.rows) {
    if (row.size() != 4) throw std::invalid_argument("standardization table: ragged row");
    s.names.push_back(row[0]);
    s.mean.push_back(parse_double(row[1]));
    s.stdev.push_back(parse_double(row[2]));
    s.retained.push_back(row[3] == "1");
  }
  if (s.names != trip_feature_names()) throw std::invalid_argument("standardization table: feature list does not match");
  return s;
}

namespace {

// Collects written files and finishes with manifest.json.
class Artifacts {
 public:
  explicit Artifacts(fs::path dir) : dir_(std::move(dir)) {
    std::error_code ec;
    fs::create_directories(dir_, ec);
    if (ec) throw std::runtime_error("cannot create output directory " + dir_.string() + ": " + ec.message());
  }

  void csv(const std::string& name, const Table& table) {
    write_csv(dir_ / name, table);
    names_.insert(name);
  }

  // The output directory is left out of the echo so that a rerun into a
  // different directory yields a byte-identical manifest.
  void manifest(const std::string& command, json config, std::optional<std::uint64_t> seed) const {
    json m;
    m["command"] = command;
    m["seed"] = seed ? json(*seed) : json(nullptr);
    m["config"] = std::move(config);
    json files = json::array();
    for (const auto& name : names_) {
      files.push_back({{"file", name}, {"bytes", fs::file_size(dir_ / name)}, {"sha256", sha256_hex(dir_ / name)}});
    }
    m["artifacts"] = std::move(files);
    std::ofstream out(dir_ / "manifest.json", std::ios::binary);
    out << m.dump(2) << '\n';
    if (!out) throw std::runtime_error("cannot write manifest in " + dir_.string());
  }

 private:
  fs::path dir_;
  std::set<std::string> names_;
};

std::string opt_path(const std::optional<fs::path>& p) { return p ? p->generic_string() : std::string(); }

void require(bool ok, const std::string& field, const std::string& message) {
  if (!ok) throw ConfigError(field, message);
}

void check_file(const fs::path& path, const std::string& field) {
  require(!path.empty(), field, "a path is required");
  require(fs::is_regular_file(path), field, "no such file: " + path.string());
}

SchemaMap schema_for(const std::optional<fs::path>& schema) {
  if (!schema) return default_schema_map();
  check_file(*schema, "--schema");
  return load_schema_map(*schema);
}

LoadedTrips load_nonempty(const fs::path& trips, const SchemaMap& schema) {
  auto loaded = load_trips(trips, schema);
  if (loaded.records.empty()) {
    throw std::runtime_error("no valid records in " + trips.string() + " (" + std::to_string(loaded.report.rows_read) +
                             " rows read, " + std::to_string(loaded.report.dropped) + " dropped)");
  }
  return loaded;
}

Table load_report_table(const LoadReport& report) {
  Table t;
  t.header = {"item", "count"};
  t.rows.push_back({"rows_read", std::to_string(report.rows_read)});
  t.rows.push_back({"dropped", std::to_string(report.dropped)});
  for (const auto& [reason, count] : report.dropped_by_reason) t.rows.push_back({"dropped: " + reason, std::to_string(count)});
  return t;
}

void write_stats(Artifacts& art, std::span<const TripRecord> records) {
  for (StatsKind kind : all_stats_kinds()) {
    art.csv("stats_" + stats_kind_name(kind) + ".csv", emit_stats(records, kind));
  }
}

AdmmConfig admm_from(double rho, double alpha, int max_iters, double eps_abs, double eps_rel) {
  require(rho > 0.0 && std::isfinite(rho), "--rho", "must be > 0");
  require(alpha >= 1.0 && alpha <= 2.0, "--alpha", "must lie in [1, 2]");
  require(max_iters > 0, "--max-iters", "must be positive");
  require(eps_abs > 0.0, "--eps-abs", "must be > 0");
  require(eps_rel > 0.0, "--eps-rel", "must be > 0");
  AdmmConfig c;
  c.rho = rho;
  c.alpha = alpha;
  c.max_iters = max_iters;
  c.eps_abs = eps_abs;
  c.eps_rel = eps_rel;
  return c;
}

}  // namespace

// ---------------------------------------------------------------------------

void cmd_synth_lasso(const SynthLassoConfig& cfg) {
  require(cfg.seed.has_value(), "--seed", "required (no default entropy source)");
  require(cfg.n >= 1, "--n", "must be >= 1");
  require(cfg.d >= 1, "--d", "must be >= 1");
  require(cfg.density > 0.0 && cfg.density <= 1.0, "--density", "must lie in (0, 1]");
  require(cfg.truth_density > 0.0 && cfg.truth_density <= 1.0, "--truth-density", "must lie in (0, 1]");
  require(cfg.noise >= 0.0 && std::isfinite(cfg.noise), "--noise", "must be >= 0");
  const AdmmConfig admm = admm_from(cfg.rho, cfg.alpha, cfg.max_iters, cfg.eps_abs, cfg.eps_rel);
  const auto grid = parse_lambda_list(cfg.lambdas, "--lambdas");

  const auto synth = generate_synthetic_lasso(cfg.n, cfg.d, cfg.density, cfg.noise, *cfg.seed, cfg.truth_density);
  const double lmax = synth.problem.lambda_max();
  std::vector<double> lambdas = grid;
  if (!cfg.absolute_lambdas) {
    for (double& l : lambdas) l *= lmax;
  }
  const auto sols = lambda_sweep(synth.problem, admm, lambdas);

  Artifacts art(cfg.out);
  Table nz;
  nz.header = {"lambda_input", "lambda", "nonzero_count", "iterations", "converged", "final_objective"};
  for (std::size_t i = 0; i < sols.size(); ++i) {
    const auto& s = sols[i];
    nz.rows.push_back({format_double(grid[i]), format_double(lambdas[i]), std::to_string(s.nonzero_count),
                       std::to_string(s.iterations), s.converged ? "1" : "0", format_double(s.final_objective())});
    Table hist;
    hist.header = {"iteration", "objective", "primal_residual", "dual_residual"};
    for (std::size_t k = 0; k < s.objective_history.size(); ++k) {
      hist.rows.push_back({std::to_string(k + 1), format_double(s.objective_history[k]),
                           format_double(s.primal_residuals[k]), format_double(s.dual_residuals[k])});
    }
    art.csv("objective_history_" + std::to_string(i) + ".csv", hist);
    if (!s.converged) std::cerr << "warning: lambda " << lambdas[i] << " hit max_iters without converging\n";
  }
  art.csv("nonzeros.csv", nz);

  art.manifest("synth-lasso",
               {{"n", cfg.n},
                {"d", cfg.d},
                {"density", cfg.density},
                {"truth_density", cfg.truth_density},
                {"noise", cfg.noise},
                {"lambdas", cfg.lambdas},
                {"absolute_lambdas", cfg.absolute_lambdas},
                {"lambda_max", lmax},
                {"rho", cfg.rho},
                {"alpha", cfg.alpha},
                {"max_iters", cfg.max_iters},
                {"eps_abs", cfg.eps_abs},
                {"eps_rel", cfg.eps_rel}},
               cfg.seed);
}

void cmd_pipeline(const PipelineConfig& cfg) {
  require(cfg.seed.has_value(), "--seed", "required (no default entropy source)");
  check_file(cfg.trips, "--trips");
  require(cfg.train >= 0, "--train", "must be >= 0");
  require(cfg.test >= 0, "--test", "must be >= 0");
  require(cfg.k >= 1, "--k", "must be >= 1");
  require(cfg.weight_scale_km > 0.0, "--weight-scale", "must be > 0");
  require(cfg.mu >= 0.0 && std::isfinite(cfg.mu), "--mu", "must be >= 0");
  require(cfg.eps > 0.0, "--eps", "must be > 0");
  require(cfg.k_assign >= 1, "--k-assign", "must be >= 1");
  const AdmmConfig admm = admm_from(cfg.rho, cfg.alpha, cfg.max_iters, cfg.eps_abs, cfg.eps_rel);
  std::optional<std::vector<double>> given;
  if (cfg.lambdas != "auto") {
    given = parse_lambda_list(cfg.lambdas, "--lambdas");
    for (std::size_t i = 1; i < given->size(); ++i) {
      require((*given)[i] > (*given)[i - 1], "--lambdas", "must be strictly increasing");
    }
  }

  const SchemaMap schema = schema_for(cfg.schema);
  const auto loaded = load_nonempty(cfg.trips, schema);
  const auto& records = loaded.records;
  const auto m = records.size();

  const std::size_t train_count = cfg.train > 0 ? static_cast<std::size_t>(cfg.train) : (m * 4) / 5;
  const std::size_t test_count = cfg.test > 0 ? static_cast<std::size_t>(cfg.test) : m - std::min(m, train_count);
  require(train_count + test_count <= m, "--train",
          "train + test (" + std::to_string(train_count + test_count) + ") exceeds the " + std::to_string(m) +
              " valid records");
  require(train_count > static_cast<std::size_t>(cfg.k), "--k", "must be smaller than the training set size");
  require(test_count >= 1, "--test", "no records left for testing");

  // Split on record positions, then refit the standardization on training rows only.
  const auto all_nodes = featurize(records).nodes;
  std::optional<HourWeights> weights;
  if (!cfg.uniform_test) weights = hourly_counts(records);
  const auto split = split_train_test(all_nodes, train_count, test_count, weights, *cfg.seed);

  auto pick = [&](const std::vector<NodeProblem>& nodes) {
    std::vector<TripRecord> out;
    for (const auto& n : nodes) out.push_back(records[static_cast<std::size_t>(n.node_id)]);
    return out;
  };
  const auto train_records = pick(split.train);
  const auto test_records = pick(split.test);
  const auto fitted = featurize(train_records);
  auto train = fitted.nodes;
  auto test = featurize(test_records, fitted.stats);
  for (std::size_t i = 0; i < train.size(); ++i) train[i].node_id = split.train[i].node_id;
  for (std::size_t i = 0; i < test.size(); ++i) test[i].node_id = split.test[i].node_id;
  for (const auto& note : fitted.report) std::cerr << "note: " << note << '\n';

  NetworkProblem problem;
  problem.nodes = train;
  problem.graph = build_knn_graph(train, cfg.k, cfg.weight_scale_km);
  problem.mu = cfg.mu;
  const double level = consensus_forcing_level(problem);
  const std::vector<double> lambdas = given ? *given : auto_lambda_grid(level);

  const auto path = regularization_path(problem, admm, lambdas, test, cfg.k_assign, cfg.eps);
  const auto best = path.best_index();

  Artifacts art(cfg.out);
  art.csv("load_report.csv", load_report_table(loaded.report));
  art.csv("standardization.csv", standardization_table(fitted.stats));
  Table tn;
  tn.header = {"node_id", "pickup_lat", "pickup_lon", "pickup_time", "response"};
  for (const auto& n : train) {
    tn.rows.push_back({std::to_string(n.node_id), format_double(n.pickup_lat), format_double(n.pickup_lon),
                       format_timestamp(n.pickup_time), format_double(n.response)});
  }
  art.csv("train_nodes.csv", tn);
  art.csv("edges.csv", edge_table(problem.graph, train));
  art.csv("components.csv", component_table(train, connected_components(problem.graph.node_count(), problem.graph.edges())));
  art.csv("path.csv", path_table(path));
  Table diag;
  diag.header = {"lambda", "iterations", "converged", "primal_residual", "dual_residual"};
  for (const auto& pt : path.points) {
    diag.rows.push_back({format_double(pt.lambda), std::to_string(pt.solution.iterations), pt.solution.converged ? "1" : "0",
                         format_double(pt.solution.state.primal_residual), format_double(pt.solution.state.dual_residual)});
    if (!pt.solution.converged) std::cerr << "warning: lambda " << pt.lambda << " hit max_iters without converging\n";
  }
  art.csv("path_diagnostics.csv", diag);
  art.csv("solution.csv", solution_table(train, path.points[best].solution));
  art.csv("predictions.csv", prediction_table(path.points[best].predictions));
  write_stats(art, records);

  art.manifest("pipeline",
               {{"trips", cfg.trips.generic_string()},
                {"schema", opt_path(cfg.schema)},
                {"train", train_count},
                {"test", test_count},
                {"uniform_test", cfg.uniform_test},
                {"k", cfg.k},
                {"weight_scale_km", cfg.weight_scale_km},
                {"lambdas", cfg.lambdas},
                {"lambda_grid", lambdas},
                {"forcing_level", level},
                {"best_lambda", path.points[best].lambda},
                {"rho", cfg.rho},
                {"alpha", cfg.alpha},
                {"mu", cfg.mu},
                {"eps", cfg.eps},
                {"eps_abs", cfg.eps_abs},
                {"eps_rel", cfg.eps_rel},
                {"max_iters", cfg.max_iters},
                {"k_assign", cfg.k_assign}},
               cfg.seed);
}

void cmd_stats(const StatsConfig& cfg) {
  check_file(cfg.trips, "--trips");
  const SchemaMap schema = schema_for(cfg.schema);
  const auto loaded = load_nonempty(cfg.trips, schema);
  Artifacts art(cfg.out);
  art.csv("load_report.csv", load_report_table(loaded.report));
  write_stats(art, loaded.records);
  art.manifest("stats",
               {{"trips", cfg.trips.generic_string()}, {"schema", opt_path(cfg.schema)}},
               std::nullopt);
}

void cmd_graph(const GraphConfig& cfg) {
  check_file(cfg.trips, "--trips");
  require(cfg.k >= 1, "--k", "must be >= 1");
  require(cfg.weight_scale_km > 0.0, "--weight-scale", "must be > 0");
  require(cfg.cut_km > 0.0, "--cut-km", "must be > 0");
  const SchemaMap schema = schema_for(cfg.schema);
  const auto loaded = load_nonempty(cfg.trips, schema);
  require(loaded.records.size() > static_cast<std::size_t>(cfg.k), "--k", "must be smaller than the number of valid records");

  const auto nodes = featurize(loaded.records).nodes;
  const auto graph = build_knn_graph(nodes, cfg.k, cfg.weight_scale_km);
  const auto labels = spatial_components(graph, cfg.cut_km);

  Artifacts art(cfg.out);
  art.csv("load_report.csv", load_report_table(loaded.report));
  art.csv("edges.csv", edge_table(graph, nodes));
  art.csv("distances.csv", distance_table(nodes));
  art.csv("components.csv", component_table(nodes, labels));
  art.manifest("graph",
               {{"trips", cfg.trips.generic_string()},
                {"schema", opt_path(cfg.schema)},
                {"k", cfg.k},
                {"weight_scale_km", cfg.weight_scale_km},
                {"cut_km", cfg.cut_km},
                {"edges", graph.edges().size()},
                {"components", component_count(labels)}},
               std::nullopt);
}

void cmd_predict(const PredictConfig& cfg) {
  check_file(cfg.trips, "--trips");
  check_file(cfg.model, "--model");
  check_file(cfg.train_nodes, "--train-nodes");
  check_file(cfg.standardization, "--standardization");
  require(cfg.k_assign >= 1, "--k-assign", "must be >= 1");

  const auto saved = parse_solution_table(read_csv(cfg.model));
  const auto stats = parse_standardization_table(read_csv(cfg.standardization));
  const Table tn = read_csv(cfg.train_nodes);
  if (tn.header.size() < 3 || tn.header[0] != "node_id" || tn.header[1] != "pickup_lat" || tn.header[2] != "pickup_lon") {
    throw ConfigError("--train-nodes", "expected header node_id,pickup_lat,pickup_lon,...");
  }
  std::map<int, std::pair<double, double>> coords;
  for (const auto& row : tn.rows) coords[static_cast<int>(parse_int(row.at(0)))] = {parse_double(row.at(1)), parse_double(row.at(2))};

  std::vector<NodeProblem> train;
  for (int id : saved.node_ids) {
    const auto it = coords.find(id);
    if (it == coords.end()) throw ConfigError("--train-nodes", "no coordinates for node " + std::to_string(id));
    NodeProblem n;
    n.node_id = id;
    n.pickup_lat = it->second.first;
    n.pickup_lon = it->second.second;
    train.push_back(std::move(n));
  }
  require(static_cast<std::size_t>(saved.x.rows()) == stats.size() + 1, "--model",
          "model width does not match the standardization table");

  const SchemaMap schema = schema_for(cfg.schema);
  const auto loaded = load_nonempty(cfg.trips, schema);
  const auto test = featurize(loaded.records, stats);
  const auto preds = predict_fares(saved.x, saved.clusters, train, test, cfg.k_assign);

  Artifacts art(cfg.out);
  art.csv("load_report.csv", load_report_table(loaded.report));
  art.csv("predictions.csv", prediction_table(preds));
  Table summary;
  summary.header = {"test_nodes", "mse"};
  summary.rows.push_back({std::to_string(preds.rows.size()), format_double(preds.mse)});
  art.csv("summary.csv", summary);
  art.manifest("predict",
               {{"trips", cfg.trips.generic_string()},
                {"model", cfg.model.generic_string()},
                {"train_nodes", cfg.train_nodes.generic_string()},
                {"standardization", cfg.standardization.generic_string()},
                {"schema", opt_path(cfg.schema)},
                {"k_assign", cfg.k_assign}},
               std::nullopt);
}

// ---------------------------------------------------------------------------

int run(int argc, char** argv) {
  CLI::App app{"Network Lasso ride-fare experiments"};
  app.set_config("--config", "", "key=value file with one [command] section per subcommand");
  app.require_subcommand(1);

  SynthLassoConfig synth;
  PipelineConfig pipe;
  StatsConfig stats;
  GraphConfig graph;
  PredictConfig pred;
  std::uint64_t synth_seed = 0;
  std::uint64_t pipe_seed = 0;
  std::string pipe_schema, stats_schema, graph_schema, pred_schema;

  auto* s = app.add_subcommand("synth-lasso", "sparse synthetic Lasso sweep");
  s->add_option("--out", synth.out, "output directory")->capture_default_str();
  auto* s_seed = s->add_option("--seed", synth_seed, "random seed (required)");
  s->add_option("--n", synth.n, "rows")->capture_default_str();
  s->add_option("--d", synth.d, "columns")->capture_default_str();
  s->add_option("--density", synth.density, "nonzero fraction of A")->capture_default_str();
  s->add_option("--truth-density", synth.truth_density, "nonzero fraction of the true x")->capture_default_str();
  s->add_option("--noise", synth.noise, "noise standard deviation")->capture_default_str();
  s->add_option("--lambdas", synth.lambdas, "comma list; fractions of lambda_max unless --absolute-lambdas")
      ->capture_default_str();
  s->add_flag("--absolute-lambdas", synth.absolute_lambdas, "treat --lambdas as absolute values");
  s->add_option("--rho", synth.rho)->capture_default_str();
  s->add_option("--alpha", synth.alpha)->capture_default_str();
  s->add_option("--max-iters", synth.max_iters)->capture_default_str();
  s->add_option("--eps-abs", synth.eps_abs)->capture_default_str();
  s->add_option("--eps-rel", synth.eps_rel)->capture_default_str();

  auto* p = app.add_subcommand("pipeline", "load, split, build graph, run the regularization path");
  p->add_option("--trips", pipe.trips, "trip CSV")->required();
  p->add_option("--out", pipe.out)->capture_default_str();
  p->add_option("--schema", pipe_schema, "canonical=header mapping file");
  auto* p_seed = p->add_option("--seed", pipe_seed, "random seed (required)");
  p->add_option("--train", pipe.train, "training nodes (0: 80% of valid rows)")->capture_default_str();
  p->add_option("--test", pipe.test, "test nodes (0: the remaining rows)")->capture_default_str();
  p->add_flag("--uniform-test", pipe.uniform_test, "sample test nodes uniformly instead of by pickup hour");
  p->add_option("--k", pipe.k, "graph neighbors")->capture_default_str();
  p->add_option("--weight-scale", pipe.weight_scale_km, "edge weight length scale in km")->capture_default_str();
  p->add_option("--lambdas", pipe.lambdas, "strictly increasing comma list, or 'auto'")->capture_default_str();
  p->add_option("--rho", pipe.rho)->capture_default_str();
  p->add_option("--alpha", pipe.alpha)->capture_default_str();
  p->add_option("--mu", pipe.mu, "per-node ridge term")->capture_default_str();
  p->add_option("--eps", pipe.eps, "consensus tolerance")->capture_default_str();
  p->add_option("--eps-abs", pipe.eps_abs)->capture_default_str();
  p->add_option("--eps-rel", pipe.eps_rel)->capture_default_str();
  p->add_option("--max-iters", pipe.max_iters)->capture_default_str();
  p->add_option("--k-assign", pipe.k_assign, "neighbors used to place test nodes")->capture_default_str();

  auto* st = app.add_subcommand("stats", "descriptive statistics tables");
  st->add_option("--trips", stats.trips)->required();
  st->add_option("--out", stats.out)->capture_default_str();
  st->add_option("--schema", stats_schema);

  auto* g = app.add_subcommand("graph", "build and export the k-NN graph");
  g->add_option("--trips", graph.trips)->required();
  g->add_option("--out", graph.out)->capture_default_str();
  g->add_option("--schema", graph_schema);
  g->add_option("--k", graph.k)->capture_default_str();
  g->add_option("--weight-scale", graph.weight_scale_km)->capture_default_str();
  g->add_option("--cut-km", graph.cut_km, "edges longer than this are cut for the component export")
      ->capture_default_str();

  auto* pr = app.add_subcommand("predict", "score new trips with a saved solution");
  pr->add_option("--trips", pred.trips)->required();
  pr->add_option("--model", pred.model, "solution.csv from pipeline")->required();
  pr->add_option("--train-nodes", pred.train_nodes, "train_nodes.csv from pipeline")->required();
  pr->add_option("--standardization", pred.standardization, "standardization.csv from pipeline")->required();
  pr->add_option("--out", pred.out)->capture_default_str();
  pr->add_option("--schema", pred_schema);
  pr->add_option("--k-assign", pred.k_assign)->capture_default_str();

  for (auto* sub : {s, p, st, g, pr}) sub->fallthrough();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  }

  auto schema_opt = [](const std::string& v) { return v.empty() ? std::nullopt : std::optional<fs::path>(v); };
  try {
    if (s->parsed()) {
      if (s_seed->count() > 0) synth.seed = synth_seed;
      cmd_synth_lasso(synth);
    } else if (p->parsed()) {
      if (p_seed->count() > 0) pipe.seed = pipe_seed;
      pipe.schema = schema_opt(pipe_schema);
      cmd_pipeline(pipe);
    } else if (st->parsed()) {
      stats.schema = schema_opt(stats_schema);
      cmd_stats(stats);
    } else if (g->parsed()) {
      graph.schema = schema_opt(graph_schema);
      cmd_graph(graph);
    } else if (pr->parsed()) {
      pred.schema = schema_opt(pred_schema);
      cmd_predict(pred);
    }
  } catch (const ConfigError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const SchemaError& e) {
    std::cerr << "error: schema: " << e.what() << '\n';
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}

}  // namespace netlasso::cli

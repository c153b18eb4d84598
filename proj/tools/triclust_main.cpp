// Command line front end: homogeneity testing (utest3), significance
// clustering (cluster3), configuration counting (count), data simulation
// (simulate) and table reproduction (benchmark). Results are JSON documents
// on stdout with an embedded run manifest; diagnostics go to stderr.

#include <chrono>
#include <cstdint>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "triclust/triclust.hpp"

namespace {

using nlohmann::json;

struct CommonOpts {
  std::string data_path;
  std::string distances_path;
  std::string groups_path;
  std::string kernel = "msd";
  bool header = false;
  double alpha = 0.05;
  int reps = 2000;
  std::string seed_text;  // integer or "auto"
  int restarts = 20;
  int threads = triclust::default_threads();
  std::string out_path;
};

std::uint64_t resolve_seed(const std::string& text) {
  if (text == "auto") {
    std::random_device rd;
    return (static_cast<std::uint64_t>(rd()) << 32) ^ rd();
  }
  std::uint64_t value = 0;
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc{} || ptr != text.data() + text.size())
    throw CLI::ValidationError("--seed", "expected an unsigned integer or 'auto', got '" + text + "'");
  return value;
}

json make_manifest(const std::string& command, const std::map<std::string, std::string>& flags,
                   std::optional<std::uint64_t> seed) {
  json m;
  m["command"] = command;
  m["flags"] = flags;
  if (seed) m["seed"] = *seed;
  m["version"] = std::string("triclust ") + triclust::kVersion;
  return m;
}

json big_to_json(const triclust::BigInt& v) {
  if (v <= std::numeric_limits<std::uint64_t>::max())
    return v.convert_to<std::uint64_t>();
  return v.str();  // decimal string once past 2^64
}

void emit(const json& doc) { std::cout << doc.dump(2) << "\n"; }

// Loads the kernel matrix per flags: either features + kernel kind, or a
// precomputed distance matrix.
triclust::KernelMatrix load_kernel(const CommonOpts& opt) {
  if (!opt.distances_path.empty()) return triclust::load_kernel_matrix(opt.distances_path);
  const triclust::Matrix data = triclust::load_matrix(opt.data_path, opt.header);
  return triclust::kernel_matrix(data, triclust::kernel_kind_from_string(opt.kernel));
}

std::map<std::string, std::string> kernel_flags(const CommonOpts& opt) {
  std::map<std::string, std::string> flags;
  if (!opt.data_path.empty()) {
    flags["data"] = opt.data_path;
    flags["kernel"] = opt.kernel;
    flags["header"] = opt.header ? "true" : "false";
  } else {
    flags["distances"] = opt.distances_path;
    flags["kernel"] = "precomputed";
  }
  return flags;
}

int run_utest3(const CommonOpts& opt) {
  const std::uint64_t seed = resolve_seed(opt.seed_text);
  const triclust::KernelMatrix k = load_kernel(opt);
  const std::vector<int> raw_labels = triclust::load_labels(opt.groups_path);
  if (static_cast<int>(raw_labels.size()) != k.n)
    throw triclust::DataError("groups file has " + std::to_string(raw_labels.size()) +
                              " labels but the data has " + std::to_string(k.n) + " rows");
  const triclust::Partition3 part = triclust::Partition3::from_labels(raw_labels);
  const triclust::VarianceModel model =
      triclust::estimate_reference(k, opt.reps, seed, opt.threads);
  const triclust::TestOutcome outcome = triclust::utest3(k, part, model, opt.alpha);

  auto flags = kernel_flags(opt);
  flags["groups"] = opt.groups_path;
  flags["alpha"] = std::to_string(opt.alpha);
  flags["reps"] = std::to_string(opt.reps);
  json doc;
  doc["schema"] = 1;
  doc["manifest"] = make_manifest("utest3", flags, seed);
  json result;
  result["n"] = k.n;
  const auto sizes = part.sizes();
  result["sizes"] = {sizes.n1, sizes.n2, sizes.n3};
  result["bn"] = outcome.bn;
  result["variance"] = outcome.variance;
  result["std_bn"] = outcome.std_bn;
  result["p_value"] = outcome.p_value;
  result["alpha"] = outcome.alpha;
  result["reject"] = outcome.reject;
  result["n_star"] = big_to_json(outcome.n_star);
  doc["result"] = result;
  emit(doc);
  return 0;
}

json partition_to_json(const triclust::Partition3& p) {
  json j;
  j["labels"] = p.labels();
  const auto sizes = p.sizes();
  j["sizes"] = {sizes.n1, sizes.n2, sizes.n3};
  return j;
}

int run_cluster3(const CommonOpts& opt) {
  const std::uint64_t seed = resolve_seed(opt.seed_text);
  const triclust::KernelMatrix k = load_kernel(opt);
  const triclust::VarianceModel model =
      triclust::estimate_reference(k, opt.reps, seed, opt.threads);
  triclust::SearchConfig cfg;
  cfg.restarts = opt.restarts;
  cfg.seed = seed;
  cfg.threads = opt.threads;
  const triclust::ClusterResult res = triclust::uclust3(k, opt.alpha, model, cfg);

  auto flags = kernel_flags(opt);
  flags["alpha"] = std::to_string(opt.alpha);
  flags["reps"] = std::to_string(opt.reps);
  flags["restarts"] = std::to_string(opt.restarts);
  json doc;
  doc["schema"] = 1;
  doc["manifest"] = make_manifest("cluster3", flags, seed);
  json result;
  result["n"] = k.n;
  result["alpha"] = res.alpha;
  result["homogeneous"] = res.homogeneous;
  result["verdict"] = res.homogeneous ? "homogeneous" : "clustered";
  if (res.partition) {
    result["labels"] = res.partition->labels();
    const auto sizes = res.partition->sizes();
    result["sizes"] = {sizes.n1, sizes.n2, sizes.n3};
  }
  result["bn"] = res.bn;
  result["std_bn"] = res.std_bn;
  result["p_value"] = res.p_value;
  result["n_star"] = big_to_json(triclust::total_count(k.n).gamma3);
  result["stage1"] = partition_to_json(*res.stage1_partition);
  result["stage1"]["bn"] = res.stage1_bn;
  result["stage1"]["std_bn"] = res.stage1_std_bn;
  result["stage1"]["p_value"] = res.stage1_p_value;
  result["visited"] = res.visited;
  doc["result"] = result;
  emit(doc);
  return 0;
}

int run_count(int n) {
  const triclust::PartitionCount counts = triclust::total_count(n);
  json doc;
  doc["schema"] = 1;
  doc["manifest"] = make_manifest("count", {{"n", std::to_string(n)}}, std::nullopt);
  json result;
  result["n"] = n;
  result["s3"] = big_to_json(counts.s3);
  result["delta3"] = big_to_json(counts.delta3);
  result["gamma3"] = big_to_json(counts.gamma3);
  result["log_gamma3"] = counts.log_gamma3;
  doc["result"] = result;
  emit(doc);
  return 0;
}

triclust::Scenario scenario_from(int n, int L, const std::vector<int>& sizes,
                                 const std::vector<double>& means, int reps, double alpha,
                                 std::uint64_t seed) {
  if (sizes.size() != 3) throw triclust::DataError("--sizes needs exactly three values a,b,c");
  if (means.size() != 3) throw triclust::DataError("--means needs exactly three values a,b,c");
  triclust::Scenario s;
  s.n = n;
  s.L = L;
  s.sizes = {sizes[0], sizes[1], sizes[2]};
  s.means = {means[0], means[1], means[2]};
  s.reps = reps;
  s.alpha = alpha;
  s.seed = seed;
  return s;
}

int run_simulate(const CommonOpts& opt, int n, int L, const std::vector<int>& sizes,
                 const std::vector<double>& means) {
  const std::uint64_t seed = resolve_seed(opt.seed_text);
  const triclust::Scenario s = scenario_from(n, L, sizes, means, 1, opt.alpha, seed);
  const auto [data, labels] = triclust::simulate_dataset(s, 0);
  if (opt.out_path.empty()) throw triclust::DataError("simulate requires --out for the data file");
  triclust::write_matrix_csv(opt.out_path, data);

  std::map<std::string, std::string> flags{
      {"n", std::to_string(n)},       {"L", std::to_string(L)},
      {"sizes", [&] { std::ostringstream os; os << sizes[0] << ',' << sizes[1] << ',' << sizes[2]; return os.str(); }()},
      {"means", [&] { std::ostringstream os; os << means[0] << ',' << means[1] << ',' << means[2]; return os.str(); }()},
      {"out", opt.out_path}};
  json doc;
  doc["schema"] = 1;
  doc["manifest"] = make_manifest("simulate", flags, seed);
  json result;
  result["n"] = n;
  result["L"] = L;
  result["sizes"] = sizes;
  result["means"] = means;
  result["labels"] = labels;
  result["path"] = opt.out_path;
  doc["result"] = result;
  emit(doc);
  return 0;
}

std::string study_csv(const std::string& table, const std::vector<triclust::StudyRow>& rows) {
  std::ostringstream os;
  os.precision(10);
  os << "table,n,L,n1,n2,n3,m1,m2,m3,reps,alpha,seed,method,"
     << (table == "power" ? "power" : "mean_ari,sd_ari") << "\n";
  for (const auto& row : rows) {
    const auto& s = row.scenario;
    os << table << ',' << s.n << ',' << s.L << ',' << s.sizes[0] << ',' << s.sizes[1] << ','
       << s.sizes[2] << ',' << s.means[0] << ',' << s.means[1] << ',' << s.means[2] << ','
       << s.reps << ',' << s.alpha << ',' << s.seed << ',' << row.method << ',';
    if (table == "power")
      os << row.power;
    else
      os << row.mean_ari << ',' << row.sd_ari;
    os << "\n";
  }
  return os.str();
}

int run_benchmark(const CommonOpts& opt, const std::string& table, int n, int L,
                  const std::vector<int>& sizes, const std::vector<double>& means, int reps) {
  const std::uint64_t seed = resolve_seed(opt.seed_text);
  const triclust::Scenario s = scenario_from(n, L, sizes, means, reps, opt.alpha, seed);
  triclust::StudyOptions study;
  study.threads = opt.threads;
  study.variance_reps = opt.reps;
  study.restarts = opt.restarts;
  std::vector<triclust::StudyRow> rows;
  if (table == "power") {
    rows.push_back(triclust::power_study(s, study));
  } else {
    rows.push_back(triclust::ari_study(s, triclust::ClusterMethod::kUclust3, study));
    rows.push_back(triclust::ari_study(s, triclust::ClusterMethod::kKmeans, study));
  }
  const std::string csv = study_csv(table, rows);

  std::map<std::string, std::string> flags{
      {"table", table},
      {"n", std::to_string(n)},
      {"L", std::to_string(L)},
      {"sizes", [&] { std::ostringstream os; os << sizes[0] << ',' << sizes[1] << ',' << sizes[2]; return os.str(); }()},
      {"means", [&] { std::ostringstream os; os << means[0] << ',' << means[1] << ',' << means[2]; return os.str(); }()},
      {"study_reps", std::to_string(reps)},
      {"alpha", std::to_string(opt.alpha)},
      {"reps", std::to_string(opt.reps)},
      {"restarts", std::to_string(opt.restarts)}};
  json doc;
  doc["schema"] = 1;
  doc["manifest"] = make_manifest("benchmark", flags, seed);
  json result;
  result["table"] = table;
  json jrows = json::array();
  for (const auto& row : rows) {
    json jr;
    jr["method"] = row.method;
    if (table == "power") {
      jr["power"] = row.power;
    } else {
      jr["mean_ari"] = row.mean_ari;
      jr["sd_ari"] = row.sd_ari;
    }
    jrows.push_back(jr);
  }
  result["rows"] = jrows;
  if (!opt.out_path.empty()) {
    std::ofstream out(opt.out_path);
    if (!out) throw triclust::DataError("cannot write file: " + opt.out_path);
    out << csv;
    std::ofstream sidecar(opt.out_path + ".json");
    sidecar << doc.dump(2) << "\n";
    result["path"] = opt.out_path;
  } else {
    result["csv"] = csv;
  }
  doc["result"] = result;
  emit(doc);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"three-group homogeneity testing and significance clustering"};
  app.require_subcommand(1);

  CommonOpts opt;
  int count_n = 0;
  int sim_n = 0, sim_L = 0, study_reps = 100;
  std::vector<int> sim_sizes;
  std::vector<double> sim_means;
  std::string table = "power";

  const auto alpha_check = CLI::Validator(
      [](std::string& value) -> std::string {
        const double a = std::strtod(value.c_str(), nullptr);
        if (!(a > 0.0 && a < 1.0)) return "alpha must be strictly between 0 and 1";
        return {};
      },
      "ALPHA");

  const auto add_kernel_opts = [&](CLI::App* cmd, bool with_groups) {
    auto* data = cmd->add_option("--data", opt.data_path, "feature matrix CSV, rows = observations");
    auto* dist = cmd->add_option("--distances", opt.distances_path, "precomputed distance matrix CSV");
    data->excludes(dist);
    dist->excludes(data);
    cmd->add_flag("--header", opt.header, "data CSV has a header row");
    cmd->add_option("--kernel", opt.kernel, "kernel: msd, euclidean or precomputed")
        ->check(CLI::IsMember({"msd", "euclidean", "precomputed"}));
    if (with_groups)
      cmd->add_option("--groups", opt.groups_path, "group labels file, one of 1/2/3 per line")
          ->required();
    cmd->add_option("--alpha", opt.alpha, "significance level")->check(alpha_check);
    cmd->add_option("--reps", opt.reps, "variance resampling replicates");
    cmd->add_option("--seed", opt.seed_text, "RNG seed (integer) or 'auto'")->required();
    cmd->add_option("--threads", opt.threads, "worker threads");
  };

  auto* utest = app.add_subcommand("utest3", "test homogeneity of three pre-specified groups");
  add_kernel_opts(utest, /*with_groups=*/true);

  auto* cluster = app.add_subcommand("cluster3", "find the best significant three-group partition");
  add_kernel_opts(cluster, /*with_groups=*/false);
  cluster->add_option("--restarts", opt.restarts, "local search restarts");

  auto* count = app.add_subcommand("count", "count three-group configurations");
  count->add_option("--n", count_n, "number of items")->required()->check(CLI::PositiveNumber);

  auto* simulate = app.add_subcommand("simulate", "generate a simulated dataset CSV");
  simulate->add_option("--n", sim_n, "observations")->required();
  simulate->add_option("--L", sim_L, "dimensions")->required();
  simulate->add_option("--sizes", sim_sizes, "group sizes a,b,c")->required()->delimiter(',');
  simulate->add_option("--means", sim_means, "group means a,b,c")->required()->delimiter(',');
  simulate->add_option("--seed", opt.seed_text, "RNG seed (integer) or 'auto'")->required();
  simulate->add_option("--out", opt.out_path, "output CSV path")->required();
  simulate->add_option("--alpha", opt.alpha, "significance level")->check(alpha_check);

  auto* bench = app.add_subcommand("benchmark", "run a power or ARI study for one scenario");
  bench->add_option("--table", table, "study type")->check(CLI::IsMember({"power", "ari"}));
  bench->add_option("--n", sim_n, "observations")->required();
  bench->add_option("--L", sim_L, "dimensions")->required();
  bench->add_option("--sizes", sim_sizes, "group sizes a,b,c")->required()->delimiter(',');
  bench->add_option("--means", sim_means, "group means a,b,c")->required()->delimiter(',');
  bench->add_option("--study-reps", study_reps, "study replicates");
  bench->add_option("--alpha", opt.alpha, "significance level")->check(alpha_check);
  bench->add_option("--reps", opt.reps, "variance resampling replicates per replicate");
  bench->add_option("--restarts", opt.restarts, "local search restarts");
  bench->add_option("--seed", opt.seed_text, "RNG seed (integer) or 'auto'")->required();
  bench->add_option("--threads", opt.threads, "worker threads");
  bench->add_option("--out", opt.out_path, "write the CSV table here plus a .json sidecar");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  const auto started = std::chrono::steady_clock::now();
  int code = 0;
  try {
    if (app.got_subcommand(utest)) {
      if (opt.data_path.empty() && opt.distances_path.empty())
        throw triclust::DataError("one of --data or --distances is required");
      code = run_utest3(opt);
    } else if (app.got_subcommand(cluster)) {
      if (opt.data_path.empty() && opt.distances_path.empty())
        throw triclust::DataError("one of --data or --distances is required");
      code = run_cluster3(opt);
    } else if (app.got_subcommand(count)) {
      code = run_count(count_n);
    } else if (app.got_subcommand(simulate)) {
      code = run_simulate(opt, sim_n, sim_L, sim_sizes, sim_means);
    } else if (app.got_subcommand(bench)) {
      code = run_benchmark(opt, table, sim_n, sim_L, sim_sizes, sim_means, study_reps);
    }
  } catch (const CLI::ValidationError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  const std::chrono::duration<double> elapsed = std::chrono::steady_clock::now() - started;
  std::cerr << "# wall_time_s=" << elapsed.count() << "\n";
  return code;
}

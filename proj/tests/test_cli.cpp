#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <sys/wait.h>
#include <vector>

#include "json.hpp"

#include "lfk/io.hpp"
#include "lfk/pide.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct RunResult {
    int code = -1;
    std::string out;
};

RunResult run(const std::string& cmd) {
    RunResult r;
    FILE* pipe = popen((cmd + " 2>/dev/null").c_str(), "r");
    REQUIRE(pipe != nullptr);
    char buf[4096];
    size_t got;
    while ((got = fread(buf, 1, sizeof(buf), pipe)) > 0) r.out.append(buf, got);
    const int st = pclose(pipe);
    r.code = WIFEXITED(st) ? WEXITSTATUS(st) : -1;
    return r;
}

std::string cli() { return LFK_CLI_PATH; }

const fs::path& scratch() {
    static const fs::path dir = [] {
        fs::path d = fs::current_path() / "cli_scratch";
        fs::remove_all(d);
        fs::create_directories(d);
        return d;
    }();
    return dir;
}

std::string file_in_scratch(const std::string& name, const std::string& text) {
    const fs::path p = scratch() / name;
    std::ofstream out(p, std::ios::binary);
    out << text;
    return p.string();
}

std::string slurp(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    REQUIRE(in.good());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

std::vector<std::string> lines_of(const std::string& text) {
    std::vector<std::string> out;
    std::istringstream ss(text);
    std::string line;
    while (std::getline(ss, line)) out.push_back(line);
    return out;
}

std::vector<std::string> split_csv(const std::string& line) {
    std::vector<std::string> out;
    std::string cur;
    for (char c : line) {
        if (c == ',') {
            out.push_back(cur);
            cur.clear();
        } else {
            cur.push_back(c);
        }
    }
    out.push_back(cur);
    return out;
}

const char* kFkConfig = R"({
  "seed": 42,
  "model": {"drift": 0.0, "sigma2": 1.0, "jumps": {"kind": "none"}},
  "problem": {
    "rate": {"family": "quadratic", "coeff": 0.5},
    "data": {"family": "one"},
    "horizon": 1.0,
    "direction": "forward_from_initial"
  },
  "method": {"name": "fk", "eval_points": [0.0, 0.5]},
  "numerics": {"n_paths": 2000, "dt": 0.01}
})";

const char* kPideConfig = R"({
  "seed": 1,
  "model": {"sigma2": 1.0, "jumps": {"kind": "none"}},
  "problem": {"rate": {"family": "quadratic", "coeff": 0.5}, "horizon": 0.1},
  "method": {"name": "pide"},
  "numerics": {"grid": {"half_width": 4.0, "points": 81, "dt": 0.01, "max_slices": 5}}
})";

const char* kVariationalConfig = R"({
  "model": {"sigma2": 1.0},
  "problem": {"rate": {"family": "quadratic", "coeff": 0.5}},
  "method": {"name": "variational", "mode": "config",
             "location": 1.0, "interval": 1.0, "kappa": 1.0}
})";

} // namespace

TEST_CASE("scalar estimates carry the pinned header and embedded config") {
    const std::string cfg = file_in_scratch("fk.json", kFkConfig);
    const std::string out = (scratch() / "fk.csv").string();
    const RunResult r = run(cli() + " fk --config " + cfg + " --out " + out);
    CHECK(r.code == 0);
    CHECK(r.out.empty()); // artifact goes to the file, not stdout

    const auto lines = lines_of(slurp(out));
    REQUIRE(lines.size() == 6);
    CHECK(lines[0].rfind("# config={", 0) == 0);
    CHECK(lines[1].rfind("# config_hash=", 0) == 0);
    CHECK(lines[1].size() == 14 + 16); // 64-bit hash in hex
    CHECK(lines[2] == "# method=fk");
    CHECK(lines[3] == "model_hash,t,p,hbar,mean,stderr,n_paths,dt,seed");

    const auto row = split_csv(lines[4]);
    REQUIRE(row.size() == 9);
    CHECK(row[0].size() == 16);
    CHECK(std::stod(row[1]) == 1.0);  // eval time defaults to the horizon
    CHECK(std::stod(row[2]) == 0.0);  // first evaluation point
    CHECK(std::stod(row[3]) == 1.0);  // unscaled regime
    CHECK(row[6] == "2000");
    CHECK(row[8] == "42");
    // E[exp(-1/2 int W^2)] = (cosh 1)^{-1/2}
    const double mean = std::stod(row[4]);
    CHECK(std::fabs(mean - 0.805018182195) < 0.05);
    const double se = std::stod(row[5]);
    CHECK(se > 0.0);
    CHECK(se < 0.02);

    // the embedded config reparses and its hash matches the stated one
    const json c = json::parse(lines[0].substr(std::string("# config=").size()));
    CHECK(c.at("seed").get<uint64_t>() == 42);
    CHECK(c.at("method").at("name").get<std::string>() == "fk");
}

TEST_CASE("artifacts are byte-identical across reruns and thread counts") {
    const std::string cfg = file_in_scratch("fk_det.json", kFkConfig);
    // the resolved config (and with it the output path) is embedded in the
    // artifact, so reruns must target the same path to compare bytes
    const std::string a = (scratch() / "det.csv").string();
    CHECK(run(cli() + " fk --config " + cfg + " --out " + a).code == 0);
    const std::string base = slurp(a);
    CHECK(run(cli() + " fk --config " + cfg + " --out " + a).code == 0);
    CHECK(base == slurp(a));

    CHECK(run("LFK_THREADS=1 " + cli() + " fk --config " + cfg + " --out " + a).code == 0);
    CHECK(base == slurp(a));
    CHECK(run("LFK_THREADS=3 " + cli() + " fk --config " + cfg + " --out " + a).code == 0);
    CHECK(base == slurp(a));

    CHECK(run(cli() + " fk --config " + cfg + " --seed 43 --out " + a).code == 0);
    CHECK(base != slurp(a));
}

TEST_CASE("json and binary formats agree with the csv estimates") {
    const std::string cfg = file_in_scratch("fk_fmt.json", kFkConfig);
    const std::string csv_path = (scratch() / "fmt.csv").string();
    const std::string json_path = (scratch() / "fmt.json").string();
    const std::string bin_path = (scratch() / "fmt.bin").string();
    REQUIRE(run(cli() + " fk --config " + cfg + " --out " + csv_path).code == 0);
    REQUIRE(run(cli() + " fk --config " + cfg + " --format json --out " + json_path).code == 0);
    REQUIRE(run(cli() + " fk --config " + cfg + " --format bin --out " + bin_path).code == 0);

    const auto csv_lines = lines_of(slurp(csv_path));
    const double csv_mean0 = std::stod(split_csv(csv_lines[4])[4]);
    const double csv_mean1 = std::stod(split_csv(csv_lines[5])[4]);

    const json j = json::parse(slurp(json_path));
    CHECK(j.at("method").get<std::string>() == "fk");
    CHECK(j.at("config_hash").get<std::string>().size() == 16);
    REQUIRE(j.at("rows").size() == 2);
    CHECK(j.at("rows")[0].at("mean").get<double>() == csv_mean0);
    CHECK(j.at("rows")[1].at("mean").get<double>() == csv_mean1);
    CHECK(j.at("rows")[1].at("p").get<double>() == 0.5);
    CHECK(j.at("config").at("seed").get<uint64_t>() == 42);

    const lfk::Slab slab = lfk::parse_slab(slurp(bin_path));
    REQUIRE(slab.rows == 2);
    REQUIRE(slab.cols == 8);
    CHECK(slab.data[0] == 1.0);        // t
    CHECK(slab.data[1] == 0.0);        // p
    CHECK(slab.data[2] == 1.0);        // hbar
    CHECK(slab.data[3] == csv_mean0);  // mean, bit-exact across formats
    CHECK(slab.data[8 + 1] == 0.5);
    CHECK(slab.data[8 + 3] == csv_mean1);
    CHECK(slab.data[5] == 2000.0);

    const std::string meta = slurp(bin_path + ".meta.json");
    const json m = json::parse(meta);
    CHECK(m.at("method").get<std::string>() == "fk");
    CHECK(m.at("config_hash").get<std::string>().size() == 16);
    CHECK(m.at("config").at("seed").get<uint64_t>() == 42);
}

TEST_CASE("grid artifacts serialize the full bordered solution") {
    const std::string cfg = file_in_scratch("pide.json", kPideConfig);
    const std::string csv_path = (scratch() / "grid.csv").string();
    const std::string bin_path = (scratch() / "grid.bin").string();
    REQUIRE(run(cli() + " pide --config " + cfg + " --out " + csv_path).code == 0);
    REQUIRE(run(cli() + " pide --config " + cfg + " --format bin --out " + bin_path).code == 0);

    // reference solution straight from the library
    lfk::ProblemSpec spec;
    spec.model.sigma2 = 1.0;
    spec.rate = lfk::QuadraticRate{0.5};
    spec.horizon = 0.1;
    const lfk::GridSolution sol = lfk::solve_pide(spec, lfk::PideGrid{4.0, 81, 0.01, 5});
    REQUIRE(sol.t.size() == 5);

    const auto lines = lines_of(slurp(csv_path));
    CHECK(lines[2] == "# method=pide");
    CHECK(lines[3].rfind("# hbar=1", 0) == 0);
    CHECK(lines[4] == "# positive=1");
    CHECK(lines[5] == "# boundary_truncated=0");
    CHECK(lines[6] == "t,p,u");
    CHECK(lines.size() == 7 + sol.t.size() * sol.x.size());
    // spot-check one interior row against the library solution
    const auto mid = split_csv(lines[7 + 1 * sol.x.size() + 40]);
    CHECK(std::stod(mid[0]) == sol.t[1]);
    CHECK(std::stod(mid[1]) == sol.x[40]);
    CHECK(std::stod(mid[2]) == sol.at(1, 40));

    const lfk::Slab slab = lfk::parse_slab(slurp(bin_path));
    REQUIRE(slab.rows == sol.t.size() + 1);
    REQUIRE(slab.cols == sol.x.size() + 1);
    CHECK(slab.data[0] == 0.0);
    CHECK(slab.data[1] == sol.x[0]);
    CHECK(slab.data[slab.cols - 1] == sol.x.back());
    for (std::size_t i = 0; i < sol.t.size(); ++i) {
        CHECK(slab.data[(i + 1) * slab.cols] == sol.t[i]);
        for (std::size_t k = 0; k < sol.x.size(); ++k)
            CHECK(slab.data[(i + 1) * slab.cols + 1 + k] == sol.at(i, k));
    }
    CHECK(fs::exists(bin_path + ".meta.json"));
}

TEST_CASE("variational artifacts summarize the minimizer") {
    const std::string cfg = file_in_scratch("var.json", kVariationalConfig);
    const RunResult r = run(cli() + " variational --config " + cfg);
    CHECK(r.code == 0);
    const auto lines = lines_of(r.out);
    double action = 0.0, drift = 0.0;
    std::string header;
    std::size_t data_rows = 0;
    for (const auto& line : lines) {
        if (line.rfind("# action=", 0) == 0) action = std::stod(line.substr(9));
        else if (line.rfind("# drift_functional=", 0) == 0) drift = std::stod(line.substr(19));
        else if (line.rfind("#", 0) == 0) continue;
        else if (header.empty()) header = line;
        else ++data_rows;
    }
    CHECK(header == "s,phi,dphi");
    CHECK(data_rows == 1001);
    CHECK(action == doctest::Approx(0.547242974874).epsilon(1e-6));
    CHECK(drift == doctest::Approx(1.09448594975).epsilon(1e-6));
}

TEST_CASE("reports merge artifacts by method") {
    const std::string cfg = file_in_scratch("fk_rep.json", kFkConfig);
    const std::string f1 = (scratch() / "rep1.csv").string();
    const std::string f2 = (scratch() / "rep2.csv").string();
    REQUIRE(run(cli() + " fk --config " + cfg + " --out " + f1).code == 0);
    REQUIRE(run(cli() + " fk --config " + cfg + " --seed 7 --out " + f2).code == 0);
    const std::string vcfg = file_in_scratch("var_rep.json", kVariationalConfig);
    const std::string f3 = (scratch() / "rep3.csv").string();
    REQUIRE(run(cli() + " variational --config " + vcfg + " --out " + f3).code == 0);

    const RunResult same = run(cli() + " report " + f1 + " " + f2);
    CHECK(same.code == 0);
    const auto sl = lines_of(same.out);
    CHECK(sl[0] == "# report sections=1");
    CHECK(sl[1] == "# section=fk");
    CHECK(sl[2] == "# sources=2");
    CHECK(sl[3] == "model_hash,t,p,hbar,mean,stderr,n_paths,dt,seed");
    CHECK(sl.size() == 8); // 4 data rows across the two artifacts

    const RunResult mixed = run(cli() + " report " + f1 + " " + f3);
    CHECK(mixed.code == 0);
    CHECK(mixed.out.find("# report sections=2") != std::string::npos);
    CHECK(mixed.out.find("# section=fk") != std::string::npos);
    CHECK(mixed.out.find("# section=variational") != std::string::npos);

    const RunResult as_json =
        run(cli() + " report --format json " + f1 + " " + f3);
    CHECK(as_json.code == 0);
    const json j = json::parse(as_json.out);
    REQUIRE(j.at("sections").size() == 2);
    CHECK(j.at("sections")[0].at("method").get<std::string>() == "fk");
    CHECK(j.at("sections")[0].at("sources").get<int>() == 1);

    // same method, different schema: refuse to merge
    const std::string h1 = file_in_scratch("h1.csv", "# method=x\na,b\n1,2\n");
    const std::string h2 = file_in_scratch("h2.csv", "# method=x\na,c\n3,4\n");
    CHECK(run(cli() + " report " + h1 + " " + h2).code == 2);
    CHECK(run(cli() + " report " + (scratch() / "absent.csv").string()).code == 2);
}

TEST_CASE("configuration failures exit with code 2") {
    CHECK(run(cli() + " fk --config " + (scratch() / "missing.json").string()).code == 2);
    const std::string bad = file_in_scratch("bad.json", "{ not json");
    CHECK(run(cli() + " fk --config " + bad).code == 2);
    const std::string unknown = file_in_scratch(
        "unknown.json",
        R"({"method": {"name": "fk", "eval_points": [0]}, "modell": {}})");
    CHECK(run(cli() + " fk --config " + unknown).code == 2);
    // config names one method, the command line another
    const std::string fkc = file_in_scratch("mismatch.json", kFkConfig);
    CHECK(run(cli() + " pide --config " + fkc).code == 2);
    // invalid model: the one-sided density requires a pure-drift carrier
    const std::string gamma = file_in_scratch("gamma_bad.json", R"({
      "model": {"drift": 1.0, "sigma2": 0.5, "jumps": {"kind": "gamma"}},
      "method": {"name": "fk", "eval_points": [0.5]}
    })");
    CHECK(run(cli() + " fk --config " + gamma).code == 2);
    // binary slabs cannot go to stdout
    CHECK(run(cli() + " fk --config " + fkc + " --format bin").code == 2);
    // unwritable output directory
    CHECK(run(cli() + " fk --config " + fkc + " --out " +
              (scratch() / "no_dir" / "x.csv").string())
              .code == 2);
    // command-line parse failures
    CHECK(run(cli() + " fk --config " + fkc + " --format xml").code == 2);
    CHECK(run(cli()).code == 2);
    CHECK(run(cli() + " frobnicate").code == 2);
    CHECK(run(cli() + " --help").code == 0);
}

TEST_CASE("resolution and stability failures use distinct exit codes") {
    // 8 points per diffusion width are required: dx = 0.05 vs sqrt(hbar) = 0.1
    const std::string coarse = file_in_scratch("coarse.json", R"({
      "model": {"sigma2": 1.0, "hbar": 0.01},
      "problem": {"rate": {"family": "quadratic"},
                  "data": {"family": "scaled_gaussian", "coeff": 1.0},
                  "horizon": 0.2},
      "method": {"name": "pide"},
      "numerics": {"grid": {"half_width": 4.0, "points": 161, "dt": 0.001, "max_slices": 5}}
    })");
    CHECK(run(cli() + " pide --config " + coarse).code == 4);

    // explicit jump step with dt * intensity = 2
    const std::string unstable = file_in_scratch("unstable.json", R"({
      "model": {"sigma2": 0.0, "hbar": 0.05, "jumps": {"kind": "two_point"}},
      "problem": {"rate": {"family": "quadratic"},
                  "data": {"family": "scaled_gaussian", "coeff": 1.0},
                  "horizon": 1.0},
      "method": {"name": "pide"},
      "numerics": {"grid": {"half_width": 4.0, "points": 161, "dt": 0.1, "max_slices": 3}}
    })");
    CHECK(run(cli() + " pide --config " + unstable).code == 3);
}

TEST_CASE("built-in fast checks pass") {
    const RunResult r = run(cli() + " verify --suite fast");
    CHECK(r.code == 0);
    CHECK(r.out.find("[PASS]") != std::string::npos);
    CHECK(r.out.find("[FAIL]") == std::string::npos);
    CHECK(r.out.find("fast: ") != std::string::npos);
    CHECK(r.out.find("all passed") != std::string::npos);
}

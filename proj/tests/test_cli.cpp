#include <catch2/catch_amalgamated.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <string>

#include <json.hpp>

#include "fgp/cv.hpp"
#include "fgp/io.hpp"

namespace fs = std::filesystem;

namespace {

struct TempDir {
    fs::path path;
    TempDir() {
        path = fs::temp_directory_path() /
               ("fgp_cli_" + std::to_string(::getpid()) + "_" + std::to_string(counter++));
        fs::create_directories(path);
    }
    ~TempDir() { fs::remove_all(path); }
    static inline int counter = 0;
};

int run_cli(const std::string& args) {
    const std::string cmd = std::string(FGP_CLI_BINARY) + " " + args + " >/dev/null 2>&1";
    const int rc = std::system(cmd.c_str());
    return WEXITSTATUS(rc);
}

void write_file(const fs::path& p, const std::string& content) {
    std::ofstream out(p);
    out << content;
}

}  // namespace

TEST_CASE("unknown flags and missing inputs exit with code 1") {
    REQUIRE(run_cli("--definitely-not-a-flag") == 1);
    REQUIRE(run_cli("fit --config /nonexistent.json --out /tmp/x") == 1);

    TempDir tmp;
    write_file(tmp.path / "cfg.json", R"({
        "model": {"family":"matern","phi":1.0,"rho":[2.0],"kappa":1.5,"sigma2":0.5},
        "mcmc": {"steps":10,"burn_in":2,"thin":1,"seed":1}
    })");
    // missing data path named in the message, exit 1
    REQUIRE(run_cli("fit --config " + (tmp.path / "cfg.json").string() + " --out " +
                    (tmp.path / "post").string()) == 1);
}

TEST_CASE("simulate then fit then predict round trip") {
    TempDir tmp;
    write_file(tmp.path / "spec.json", R"({
        "kind": "stationary_dense",
        "lo": [0.0, 0.0], "hi": [15.0, 15.0],
        "count": 120,
        "model": {"family":"matern","phi":1.0,"rho":[3.0],"kappa":1.5,"sigma2":0.25},
        "nu2": 0.04,
        "seed": 11,
        "snap_to_grid": true
    })");
    REQUIRE(run_cli("simulate --spec " + (tmp.path / "spec.json").string() + " --out " +
                    tmp.path.string()) == 0);
    REQUIRE(fs::exists(tmp.path / "observations.csv"));
    REQUIRE(fs::exists(tmp.path / "truth.csv"));

    write_file(tmp.path / "cfg.json", R"({
        "model": {"family":"matern","phi":1.0,"rho":[3.0],"kappa":1.5,"sigma2":0.25},
        "mcmc": {"steps":60,"burn_in":20,"thin":2,"seed":5},
        "noise": {"sample_nu2": true, "nu2_init": 0.05},
        "priors": {"rho": {"type":"uniform","a":0.5,"b":10.0}},
        "data": {"coords":["s1","s2"],"value":"z","mode":"strict","target_shape":[16,16]}
    })");
    REQUIRE(run_cli("fit --data " + (tmp.path / "observations.csv").string() + " --config " +
                    (tmp.path / "cfg.json").string() + " --out " + (tmp.path / "post").string()) == 0);
    REQUIRE(fs::exists(tmp.path / "post" / "draws.csv"));
    REQUIRE(fs::exists(tmp.path / "post" / "y_draws.bin"));
    REQUIRE(fs::exists(tmp.path / "post" / "meta.json"));

    write_file(tmp.path / "targets.csv", "s1,s2\n3.5,4.5\n10.0,2.0\n");
    REQUIRE(run_cli("predict --posterior " + (tmp.path / "post").string() + " --targets " +
                    (tmp.path / "targets.csv").string() + " --out " +
                    (tmp.path / "pred.csv").string()) == 0);
    REQUIRE(fs::exists(tmp.path / "pred.csv"));
    {
        std::ifstream in(tmp.path / "pred.csv");
        std::string header;
        std::getline(in, header);
        REQUIRE(header == "s1,s2,mean,sd");
        std::string row;
        int rows = 0;
        while (std::getline(in, row))
            if (!row.empty()) ++rows;
        REQUIRE(rows == 2);
    }

    SECTION("diagnose runs on the posterior") {
        REQUIRE(run_cli("diagnose --posterior " + (tmp.path / "post").string() + " --out " +
                        (tmp.path / "diag.csv").string()) == 0);
        REQUIRE(fs::exists(tmp.path / "diag.csv"));
    }
}

TEST_CASE("two-chain fit feeds the diagnostics with an agreement statistic") {
    TempDir tmp;
    write_file(tmp.path / "spec.json", R"({
        "kind": "stationary_dense",
        "lo": [0.0], "hi": [63.0],
        "count": 64,
        "model": {"family":"squared_exponential","phi":1.0,"rho":[3.0],"kappa":1.5,"sigma2":0.2},
        "nu2": 0.02,
        "seed": 3,
        "snap_to_grid": true
    })");
    REQUIRE(run_cli("simulate --spec " + (tmp.path / "spec.json").string() + " --out " +
                    tmp.path.string()) == 0);
    write_file(tmp.path / "cfg.json", R"({
        "model": {"family":"squared_exponential","phi":1.0,"rho":[3.0],"kappa":1.5,"sigma2":0.2},
        "mcmc": {"steps":80,"burn_in":30,"thin":2,"chains":2,"seed":5},
        "noise": {"sample_nu2": false, "nu2_init": 0.02},
        "priors": {"rho": {"type":"uniform","a":0.5,"b":10.0}},
        "data": {"coords":["s1"],"value":"z","mode":"strict"}
    })");
    REQUIRE(run_cli("fit --data " + (tmp.path / "observations.csv").string() + " --config " +
                    (tmp.path / "cfg.json").string() + " --out " + (tmp.path / "post").string()) == 0);
    REQUIRE(run_cli("diagnose --posterior " + (tmp.path / "post").string() + " --out " +
                    (tmp.path / "diag.csv").string()) == 0);
    std::ifstream in(tmp.path / "diag.csv");
    std::string header;
    std::getline(in, header);
    REQUIRE(header == "parameter,rhat,flagged,acf1,acf5,acf10");
}

TEST_CASE("cv subcommand writes a recomputable report") {
    TempDir tmp;
    write_file(tmp.path / "spec.json", R"({
        "kind": "stationary_dense",
        "lo": [0.0, 0.0], "hi": [11.0, 11.0],
        "count": 100,
        "model": {"family":"squared_exponential","phi":1.0,"rho":[2.5],"kappa":1.5,"sigma2":0.2},
        "nu2": 0.05,
        "seed": 21,
        "snap_to_grid": true
    })");
    REQUIRE(run_cli("simulate --spec " + (tmp.path / "spec.json").string() + " --out " +
                    tmp.path.string()) == 0);
    write_file(tmp.path / "cfg.json", R"({
        "model": {"family":"squared_exponential","phi":1.0,"rho":[2.5],"kappa":1.5,"sigma2":0.2},
        "mcmc": {"steps":60,"burn_in":20,"thin":2,"seed":5},
        "noise": {"sample_nu2": false, "nu2_init": 0.05},
        "priors": {"rho": {"type":"uniform","a":0.5,"b":8.0}},
        "data": {"coords":["s1","s2"],"value":"z","mode":"misaligned","target_shape":[12,12]}
    })");
    REQUIRE(run_cli("cv --data " + (tmp.path / "observations.csv").string() + " --config " +
                    (tmp.path / "cfg.json").string() + " --split 0.8 --out " +
                    (tmp.path / "cv").string()) == 0);
    REQUIRE(fs::exists(tmp.path / "cv" / "cv_report.json"));
    REQUIRE(fs::exists(tmp.path / "cv" / "cv_predictions.csv"));

    // metrics recompute from the persisted predictions
    std::ifstream jin(tmp.path / "cv" / "cv_report.json");
    nlohmann::json rep;
    jin >> rep;
    std::ifstream pin(tmp.path / "cv" / "cv_predictions.csv");
    std::string line;
    std::getline(pin, line);
    std::vector<std::vector<double>> rows;
    while (std::getline(pin, line)) {
        if (line.empty()) continue;
        std::vector<double> row;
        std::size_t pos = 0;
        while (pos != std::string::npos) {
            auto next = line.find(',', pos);
            row.push_back(std::stod(line.substr(pos, next - pos)));
            pos = next == std::string::npos ? next : next + 1;
        }
        rows.push_back(std::move(row));
    }
    auto [rmse, mad] = fgp::CvReport::metrics_from_rows(rows, 2);
    REQUIRE(rmse == Catch::Approx(rep["rmse"].get<double>()).margin(1e-12));
    REQUIRE(mad == Catch::Approx(rep["mad"].get<double>()).margin(1e-12));
}

TEST_CASE("scaling subcommand emits the csv table") {
    TempDir tmp;
    REQUIRE(run_cli("scaling --sizes 256 512 --out " + (tmp.path / "scaling.csv").string()) == 0);
    std::ifstream in(tmp.path / "scaling.csv");
    std::string header;
    std::getline(in, header);
    REQUIRE(header == "n,m_active,sec_likelihood_truncated,sec_likelihood_full,sec_sweep");
    int rows = 0;
    std::string line;
    while (std::getline(in, line))
        if (!line.empty()) ++rows;
    REQUIRE(rows == 2);
}

#include <catch_amalgamated.hpp>
#include <json.hpp>

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct Run {
    int code = -1;
    std::string out;
    std::string err;
};

std::string slurp(const fs::path& p) {
    std::ifstream in(p);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

const fs::path& work() {
    static const fs::path dir = [] {
        const fs::path d = fs::temp_directory_path() / "contagion_cli_test";
        fs::remove_all(d);
        fs::create_directories(d);
        return d;
    }();
    return dir;
}

Run run(const std::string& args, const std::string& env = "") {
    const fs::path out = work() / "stdout.txt";
    const fs::path err = work() / "stderr.txt";
    const std::string cmd = env + " \"" CONTAGION_CLI "\" " + args + " >\"" + out.string() + "\" 2>\"" +
                            err.string() + "\"";
    const int status = std::system(cmd.c_str());
    Run r;
    r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    r.out = slurp(out);
    r.err = slurp(err);
    return r;
}

fs::path write_config(const std::string& name, const json& doc) {
    const fs::path p = work() / name;
    std::ofstream(p) << doc.dump(2);
    return p;
}

json small_config() {
    return json::parse(R"({
        "model": {"alpha": 0.0, "sigma": 1.0, "exposure_c": 0.1, "horizon": 0.05},
        "initial": {"kind": "mollified_uniform", "a": 0.5, "b": 1.5, "width": 0.02},
        "simulation": {"n_banks": 2000, "dt": 1e-3, "seed": 3},
        "pde": {"h": 0.01, "y_max": 8.0, "dt": 1e-3},
        "fixedpoint": {"window_length": 0.05, "tol": 1e-7},
        "compare": {"n_ladder": [100, 400], "n_seeds": 2, "mc_paths": 2000}
    })");
}

}  // namespace

TEST_CASE("cstar prints JSON") {
    const Run r = run("cstar --sigma 1");
    REQUIRE(r.code == 0);
    const json doc = json::parse(r.out);
    CHECK(doc.at("status") == "ok");
    CHECK(doc.at("c_star").get<double>() == Catch::Approx(47.95).epsilon(0.01));
}

TEST_CASE("usage errors exit 2 with error JSON") {
    for (const std::string args : {"", "nosuch", "cstar", "simulate", "cstar --sigma abc"}) {
        INFO(args);
        const Run r = run(args);
        CHECK(r.code == 2);
        if (!args.empty()) {
            const json err = json::parse(r.err);
            CHECK(err.at("status") == "error");
            CHECK(err.at("exit_code") == 2);
        }
    }
}

TEST_CASE("validation errors exit 2") {
    const Run missing = run("simulate -c " + (work() / "absent.json").string());
    CHECK(missing.code == 2);

    json doc = small_config();
    doc["model"]["bogus"] = 1;
    const Run unknown = run("simulate -c " + write_config("unknown.json", doc).string());
    CHECK(unknown.code == 2);
    CHECK(json::parse(unknown.err).at("kind") == "validation");

    const Run bad_set = run("simulate -c " + write_config("ok.json", small_config()).string() +
                            " --set model.sigma=-1");
    CHECK(bad_set.code == 2);

    const Run bad_seed = run("simulate -c " + write_config("ok.json", small_config()).string(), "CONTAGION_SEED=x");
    CHECK(bad_seed.code == 2);
}

TEST_CASE("numerical failures exit 3") {
    // The PDE needs an admissible density: a point mass cannot be discretized,
    // but that is a validation error; total absorption is numerical.
    json doc = small_config();
    doc["model"]["horizon"] = 5.0;
    doc["initial"] = json::parse(R"({"kind": "mollified_uniform", "a": 0.02, "b": 0.04, "width": 0.002})");
    doc["pde"] = json::parse(R"({"h": 0.002, "y_max": 9.0, "dt": 1e-3})");
    doc["fixedpoint"] = json::parse(R"({"window_length": 0.01, "explosion_threshold": 1e-12})");
    doc["model"]["exposure_c"] = 0.9;
    const Run r = run("compare -c " + write_config("explode.json", doc).string() + " -o " +
                      (work() / "explode").string());
    CHECK(r.code == 3);
    CHECK(json::parse(r.err).at("exit_code") == 3);
}

TEST_CASE("simulate writes a manifest and analyze reads it") {
    const fs::path dir = work() / "sim";
    const Run r = run("simulate -c " + write_config("sim.json", small_config()).string() + " -o " + dir.string());
    REQUIRE(r.code == 0);
    const json manifest = json::parse(slurp(dir / "manifest.json"));
    CHECK(manifest.at("command") == "simulate");
    CHECK(manifest.at("seed") == 3);
    CHECK(manifest.contains("format_version"));
    CHECK(fs::exists(dir / "series.csv"));

    const Run seeded = run("simulate -c " + (work() / "sim.json").string() + " -o " + (work() / "sim7").string(),
                           "CONTAGION_SEED=7");
    REQUIRE(seeded.code == 0);
    CHECK(json::parse(slurp(work() / "sim7" / "manifest.json")).at("seed") == 7);

    const Run a = run("analyze --run " + dir.string());
    REQUIRE(a.code == 0);
    CHECK(fs::exists(dir / "analysis" / "analysis.json"));
}

TEST_CASE("horizon zero gives the initial state only") {
    json doc = small_config();
    doc["model"]["horizon"] = 0.0;
    const fs::path dir = work() / "h0";
    const Run r = run("simulate -c " + write_config("h0.json", doc).string() + " -o " + dir.string());
    REQUIRE(r.code == 0);
    const std::string series = slurp(dir / "series.csv");
    CHECK(std::count(series.begin(), series.end(), '\n') == 2);
}

TEST_CASE("fixedpoint, pde and oracle chain") {
    const fs::path cfg = write_config("chain.json", small_config());
    const fs::path fp = work() / "fp";
    REQUIRE(run("fixedpoint -c " + cfg.string() + " -o " + fp.string()).code == 0);
    CHECK(fs::exists(fp / "loss_rate.csv"));
    CHECK(fs::exists(fp / "fixed_point_report.json"));

    const fs::path pde = work() / "pde";
    REQUIRE(run("pde -c " + cfg.string() + " -o " + pde.string() + " --lambda " + fp.string()).code == 0);
    CHECK(fs::exists(pde / "conservation.csv"));

    const fs::path orc = work() / "oracle";
    const Run o = run("oracle -c " + cfg.string() + " -o " + orc.string() + " --lambda " + fp.string() +
                      " --paths 1000");
    REQUIRE(o.code == 0);
    CHECK(fs::exists(orc / "survival.csv"));

    CHECK(run("analyze --run " + fp.string()).code == 0);
    CHECK(fs::exists(fp / "analysis" / "boundary_density.csv"));
}

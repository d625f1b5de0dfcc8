#include "cli.hpp"

#include <doctest.h>
#include <json.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

namespace {

struct Result {
    int code = 0;
    std::string out;
    std::string err;

    nlohmann::json json() const { return nlohmann::json::parse(out); }
};

Result run(std::vector<std::string> args) {
    std::ostringstream out, err;
    Result r;
    r.code = geom::cli::run(args, out, err);
    r.out = out.str();
    r.err = err.str();
    return r;
}

std::filesystem::path temp_file(const std::string& name) { return std::filesystem::temp_directory_path() / name; }

}  // namespace

TEST_SUITE("cli") {

TEST_CASE("curvature on the unit sphere") {
    const Result r = run({"curvature", "--preset", "sphere:n=2,R=1", "--point", "1.0,0.5"});
    REQUIRE(r.code == 0);
    const auto j = r.json();
    CHECK(j["schema"] == 1);
    CHECK(j["command"] == "curvature");
    CHECK(j["engine_version"] == "1.0.0");
    CHECK(j["einstein"]["is_constant_curvature"] == true);
    CHECK(j["einstein"]["curvature_scale"].get<double>() == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(j["all_invariants_pass"] == true);
    for (const auto& inv : j["invariants"]) {
        CHECK(inv.contains("residual"));
        CHECK(inv.contains("threshold"));
    }
}

TEST_CASE("curvature of flat space is zero") {
    const Result r = run({"curvature", "--preset", "flat:p=1,q=3", "--point", "0,0,0,0", "--format", "csv"});
    REQUIRE(r.code == 0);
    std::istringstream in(r.out);
    std::string line;
    std::getline(in, line);
    CHECK(line == "point,tensor,a,b,c,d,value");
    int riemann_rows = 0;
    while (std::getline(in, line)) {
        if (line.find(",riemann_frame,") == std::string::npos) continue;
        ++riemann_rows;
        CHECK(line.substr(line.rfind(',') + 1) == "0");
    }
    CHECK(riemann_rows == 256);
}

TEST_CASE("exit codes") {
    CHECK(run({"curvature", "--preset", "schwarzschild:M=1", "--point", "0,1.5,1.0,0"}).code == 3);
    CHECK(run({"curvature", "--preset", "torus:n=2", "--point", "0,0"}).code == 2);
    CHECK(run({"curvature", "--preset", "sphere:n=2,R=1", "--point", "1.0"}).code == 2);
    CHECK(run({"curvature", "--preset", "sphere:n=2,R=1", "--point", "1.0,abc"}).code == 2);
    CHECK(run({"curvature", "--metric", temp_file("geom_missing_metric.txt").string(), "--point", "0,0"}).code == 2);
    CHECK(run({"bogus"}).code == 2);
    CHECK(run({"algebra", "--signature", ""}).code == 2);
    CHECK(run({"algebra"}).code == 2);
    CHECK(run({"algebra", "--signature", "+,+,+", "--reps", "spin:x"}).code == 2);
    CHECK(run({"killing", "--n", "2", "--K", "0"}).code == 2);
    CHECK(run({"conjugate", "--preset", "flat:p=1,q=1", "--point", "0,0"}).code == 0);
    CHECK(run({"--help"}).code == 0);
}

TEST_CASE("metric documents from a file") {
    const auto path = temp_file("geom_cli_metric.txt");
    {
        std::ofstream f(path);
        f << "dim = 2\nsignature = +,+\ncoords = th, ph\ndomain th = (0, 3.14159)\n"
             "g[0][0] = 4\ng[1][1] = 4 * sin(th)^2\n";
    }
    const Result r = run({"curvature", "--metric", path.string(), "--point", "1.0,0.2"});
    REQUIRE(r.code == 0);
    CHECK(r.json()["einstein"]["curvature_scale"].get<double>() == doctest::Approx(0.25).epsilon(1e-12));
    {
        std::ofstream f(path);
        f << "dim = 2\nsignature = +,+\ncoords = th, ph\ng[0][0] = 1\ng[1][1] = sin(th\n";
    }
    const Result bad = run({"curvature", "--metric", path.string(), "--point", "1.0,0.2"});
    CHECK(bad.code == 2);
    CHECK(bad.err.find("line 5") != std::string::npos);
    std::filesystem::remove(path);
}

TEST_CASE("normal coordinates against the oracle") {
    const Result r = run({"normal", "--preset", "sphere:n=2,R=1", "--origin", "1.2,0.3", "--z", "0.18,0.24"});
    REQUIRE(r.code == 0);
    const auto item = r.json()["items"][0];
    CHECK(item["oracle_delta"].get<double>() < 1e-5);
    CHECK(item["z_norm"].get<double>() == doctest::Approx(0.3));
    CHECK(r.json()["line_element"].get<std::string>().find("B_ABCD") != std::string::npos);

    const Result f = run({"normal", "--preset", "flat:p=0,q=3", "--dirs", "6"});
    REQUIRE(f.code == 0);
    for (const auto& it : f.json()["items"]) CHECK(it["conformal"]["sigma"].get<double>() == 0.0);
}

TEST_CASE("normal refuses points beyond the conjugate radius") {
    const Result r = run({"normal", "--preset", "sphere:n=2,R=1", "--origin", "1.5707963,0", "--z", "0,3.4558"});
    CHECK(r.code == 4);
    CHECK(r.err.find("3.14159") != std::string::npos);
}

TEST_CASE("conjugate points") {
    const Result s = run({"conjugate", "--preset", "sphere:n=2,R=1", "--point", "1.0,0.2", "--dirs", "8"});
    REQUIRE(s.code == 0);
    const auto js = s.json();
    REQUIRE(js["directions"].size() == 8);
    for (const auto& d : js["directions"]) CHECK(std::abs(d["s_conjugate"].get<double>() - 3.141592653589793) < 1e-4);

    for (const char* preset : {"flat:p=0,q=2", "hyperbolic:n=2,R=1"}) {
        CAPTURE(std::string(preset));
        const Result n = run({"conjugate", "--preset", preset, "--dirs", "8"});
        REQUIRE(n.code == 0);
        const auto jn = n.json();
        CHECK(jn["chart_radius"].is_null());
        for (const auto& d : jn["directions"]) {
            CHECK(d["s_conjugate"].is_null());
            CHECK(d["note"].get<std::string>().find("no conjugate point up to s = 10") != std::string::npos);
        }
    }
}

TEST_CASE("killing report") {
    const Result r = run({"killing", "--n", "2", "--K", "1", "--vector", "0,0,1", "--samples", "6"});
    REQUIRE(r.code == 0);
    const auto j = r.json();
    const auto v = j["vectors"][0];
    CHECK(v["kind"] == "conformal_killing");
    for (const auto& s : v["samples"])
        CHECK(std::abs(s["lambda"].get<double>() + s["cos_colatitude"].get<double>()) < 1e-6);
    for (const auto& rot : j["rotations"]) CHECK(rot["kind"] == "killing");
    const Result pair = run({"killing", "--n", "2", "--K", "1", "--vector", "1,0,0", "--vector", "0,1,0"});
    REQUIRE(pair.code == 0);
    for (const auto& c : pair.json()["commutators"]) {
        CHECK(c["kind"] == "killing");
        CHECK(c["max_lie"].get<double>() < 1e-7);
    }
}

TEST_CASE("algebra casimir column") {
    const Result r = run({"algebra", "--signature", "+,+,+", "--reps", "vector,spin:1/2,spin:2", "--format", "csv"});
    REQUIRE(r.code == 0);
    std::istringstream in(r.out);
    std::string line;
    std::getline(in, line);
    CHECK(line == "rep,dim,eigenvalue,multiplicity,expected,closure_residual,jacobi_residual");
    std::vector<std::string> eig;
    while (std::getline(in, line)) {
        std::istringstream row(line);
        std::string cell;
        std::getline(row, cell, ',');
        std::getline(row, cell, ',');
        std::getline(row, cell, ',');
        eig.push_back(cell);
    }
    CHECK(eig == std::vector<std::string>{"2", "0.75", "6"});
    CHECK(r.err.find("invariant,residual,threshold,pass") == 0);

    const Result lor = run({"algebra", "--signature", "-,+,+,+"});
    REQUIRE(lor.code == 0);
    CHECK(lor.json()["reps"][0]["closure_residual"].get<double>() < 1e-12);
}

TEST_CASE("failing invariants exit nonzero with a report") {
    const Result r = run({"algebra", "--signature", "+,+,+", "--reps", "spin:2", "--tol", "1e-20"});
    CHECK(r.code == 5);
    REQUIRE_FALSE(r.out.empty());
    CHECK(r.json()["all_invariants_pass"] == false);
    CHECK(r.err.find("spin:2.closure") != std::string::npos);
}

TEST_CASE("reports are byte-identical across runs and thread counts") {
    const std::vector<std::vector<std::string>> commands{
        {"curvature", "--preset", "schwarzschild:M=1", "--point", "0,10,1.2,0", "--point", "0,6,0.7,1"},
        {"normal", "--preset", "sphere:n=3,R=1", "--dirs", "5", "--seed", "3"},
        {"conjugate", "--preset", "sphere:n=2,R=2", "--dirs", "6", "--seed", "9"},
        {"killing", "--n", "3", "--K", "-1", "--samples", "5", "--seed", "4"},
        {"algebra", "--signature", "-,+,+", "--reps", "vector,trivial"},
        {"conjugate", "--preset", "hyperbolic:n=3,R=1", "--dirs", "4", "--format", "csv"},
    };
    for (const auto& cmd : commands) {
        CAPTURE(cmd[0]);
        setenv("GEOM_THREADS", "1", 1);
        const Result a = run(cmd);
        setenv("GEOM_THREADS", "4", 1);
        const Result b = run(cmd);
        unsetenv("GEOM_THREADS");
        const Result c = run(cmd);
        CHECK(a.code == 0);
        CHECK(a.out == b.out);
        CHECK(a.out == c.out);
    }
    const Result s1 = run({"normal", "--preset", "sphere:n=3,R=1", "--dirs", "5", "--seed", "3"});
    const Result s2 = run({"normal", "--preset", "sphere:n=3,R=1", "--dirs", "5", "--seed", "4"});
    CHECK(s1.out != s2.out);
}

TEST_CASE("report written to a file") {
    const auto path = temp_file("geom_cli_report.json");
    const Result r = run({"algebra", "--signature", "+,+,+", "--out", path.string()});
    REQUIRE(r.code == 0);
    CHECK(r.out.empty());
    std::ifstream f(path);
    std::stringstream text;
    text << f.rdbuf();
    CHECK(nlohmann::json::parse(text.str())["command"] == "algebra");
    std::filesystem::remove(path);
}

TEST_CASE("timing is opt-in") {
    const Result plain = run({"algebra", "--signature", "+,+,+"});
    CHECK_FALSE(plain.json().contains("wall_time_seconds"));
    const Result timed = run({"algebra", "--signature", "+,+,+", "--timing"});
    CHECK(timed.json().contains("wall_time_seconds"));
}

}  // TEST_SUITE

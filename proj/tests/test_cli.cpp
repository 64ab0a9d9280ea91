#include <cmath>
#include <cstdlib>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

#include "doctest.h"
#include "oracles.hpp"
#include "qpf/cli.hpp"
#include "qpf/errors.hpp"
#include "qpf/io.hpp"

using namespace qpf;
namespace fs = std::filesystem;

namespace {

struct Run {
    int code;
    std::string out;
    std::string err;
};

Run run(std::vector<std::string> args) {
    std::ostringstream out, err;
    const int code = cli::run(args, out, err);
    return {code, out.str(), err.str()};
}

fs::path scratch(const std::string& name) {
    const auto p = fs::temp_directory_path() / ("qpf_cli_test_" + name);
    fs::remove_all(p);
    fs::create_directories(p);
    return p;
}

std::string slurp(const fs::path& p) {
    std::ifstream f(p, std::ios::binary);
    std::ostringstream s;
    s << f.rdbuf();
    return s.str();
}

json first_json(const std::string& text) { return json::parse(text.substr(0, text.find('\n'))); }

}  // namespace

TEST_CASE("rho command") {
    auto r = run({"rho", "--family", "translation", "--rho0", "0.25", "--n", "100000"});
    REQUIRE(r.code == cli::ok);
    CHECK(first_json(r.out).at("value").get<double>() == doctest::Approx(0.25).epsilon(1e-12));

    r = run({"rho", "--family", "arnold", "--alpha", "0.5", "--tau", "0", "--beta", "0"});
    REQUIRE(r.code == cli::ok);
    CHECK(std::abs(first_json(r.out).at("value").get<double>()) <= 1e-9);

    r = run({"rho", "--family", "harper", "--lambda", "0", "--energy", "0", "--n", "20000"});
    REQUIRE(r.code == cli::ok);
    CHECK(first_json(r.out).at("value").get<double>() == doctest::Approx(0.5).epsilon(1e-9));

    r = run({"rho", "--n", "1000", "--format", "csv"});
    REQUIRE(r.code == cli::ok);
    CHECK(r.out.rfind("value,error_radius,n_used,method\n", 0) == 0);
}

TEST_CASE("probe command") {
    auto r = run({"probe", "--family", "translation", "--rho0", "0.1", "--n", "5000"});
    REQUIRE(r.code == cli::ok);
    CHECK(first_json(r.out).at("kind") == "strictly_monotone");

    r = run({"probe", "--family", "arnold", "--alpha", "0.9", "--tau", "0", "--n", "20000"});
    REQUIRE(r.code == cli::ok);
    CHECK(first_json(r.out).at("kind") == "locked");

    r = run({"probe", "--family", "harper", "--lambda", "2", "--energy", "1.5", "--n", "20000", "--eps-min-exp",
             "-6", "--eps-max-exp", "-3"});
    REQUIRE(r.code == cli::ok);
    CHECK(first_json(r.out).at("kind") == "locked");

    // Exit 0 regardless of verdict, 5 when the grid cannot be resolved.
    r = run({"probe", "--family", "arnold", "--alpha", "0.8", "--beta", "0.3", "--tau", "0.3", "--n", "50",
             "--method", "plain"});
    CHECK(r.code == cli::numerical);
}

TEST_CASE("deviations command") {
    const auto r = run({"deviations", "--family", "translation", "--rho0", "0.25", "--n", "4096"});
    REQUIRE(r.code == cli::ok);
    const auto j = first_json(r.out);
    for (const auto& s : j.at("samples"))
        CHECK(s.at("value").get<double>() == 0.0);
    CHECK(j.at("diagnostic").at("heuristic") == true);
    CHECK(j.at("diagnostic").at("verdict") == "bounded_like");
}

TEST_CASE("sweep command") {
    const auto dir = scratch("sweep");
    auto r = run({"sweep", "--family", "translation", "--axis", "rho0:0:0.5:11", "--n", "1000", "--format", "csv",
                  "--out", (dir / "line").string()});
    REQUIRE(r.code == cli::ok);
    std::istringstream csv(slurp(dir / "line.csv"));
    std::string line;
    std::getline(csv, line);
    CHECK(line == "rho0,rho,err");
    int rows = 0;
    double previous = -1.0;
    while (std::getline(csv, line)) {
        const double p = std::stod(line.substr(0, line.find(',')));
        const double rho = std::stod(line.substr(line.find(',') + 1));
        CHECK(rho == doctest::Approx(p).epsilon(1e-12));
        CHECK(rho > previous);
        previous = rho;
        ++rows;
    }
    CHECK(rows == 11);

    r = run({"sweep", "--family", "arnold", "--alpha", "0.5", "--axis", "tau:-0.2:0.2:81", "--n", "5000"});
    REQUIRE(r.code == cli::ok);
    CHECK(r.out.find("plateau tau=") != std::string::npos);
    CHECK(r.out.find("k=0 l=0 p=1 q=1") != std::string::npos);
}

TEST_CASE("2-D sweep binary layout") {
    const auto dir = scratch("grid");
    const auto prefix = (dir / "g").string();
    const auto r = run({"sweep", "--family", "arnold", "--alpha", "0.6", "--axis", "tau:-0.1:0.1:4", "--axis2",
                        "beta:0:0.2:3", "--n", "1000", "--out", prefix});
    REQUIRE(r.code == cli::ok);
    const auto side = json::parse(slurp(prefix + ".bin.json"));
    CHECK(side.at("shape") == json::array({2, 4, 3}));
    const auto bytes = slurp(prefix + ".bin");
    REQUIRE(bytes.size() == 2 * 4 * 3 * 8);
    const auto doc = json::parse(slurp(prefix + ".json"));
    const auto& cells = doc.at("cells");
    for (std::size_t c = 0; c < 12; ++c) {
        std::uint64_t bits = 0;
        for (int b = 7; b >= 0; --b)
            bits = (bits << 8) | static_cast<unsigned char>(bytes[8 * c + static_cast<std::size_t>(b)]);
        double v;
        std::memcpy(&v, &bits, 8);
        CHECK(v == cells.at(c).at("value").get<double>());
    }
}

TEST_CASE("tongue command") {
    auto r = run({"tongue", "--family", "arnold", "--alpha", "0.5", "--param", "tau", "--target", "0", "--bracket",
                  "0,0.2", "--tol", "1e-7", "--n", "20000"});
    REQUIRE(r.code == cli::ok);
    CHECK(std::abs(first_json(r.out).at("param").get<double>() - 0.5 / kTwoPi) <= 1e-6);

    r = run({"tongue", "--family", "arnold", "--alpha", "0.5", "--relation", "0,0,1,1", "--bracket", "0,0.2"});
    CHECK(r.code == cli::ok);

    r = run({"tongue", "--family", "arnold", "--alpha", "0.5", "--target", "0", "--bracket", "0.1,0.2"});
    CHECK(r.code == cli::config);
    r = run({"tongue", "--family", "arnold", "--alpha", "0.5", "--bracket", "0,0.2"});
    CHECK(r.code == cli::config);
}

TEST_CASE("strip and annulus commands") {
    auto r = run({"annulus", "--family", "arnold", "--alpha", "0.9", "--beta", "0.05"});
    REQUIRE(r.code == cli::ok);
    CHECK(first_json(r.out).at("found") == true);

    r = run({"annulus", "--family", "translation", "--rho0", "0.1", "--candidates", "8"});
    REQUIRE(r.code == cli::ok);
    CHECK(first_json(r.out).at("found") == false);

    const auto dir = scratch("strip");
    r = run({"strip", "--family", "arnold", "--alpha", "0.9", "--beta", "0.05", "--grid", "256", "--format", "csv",
             "--out", (dir / "s").string()});
    REQUIRE(r.code == cli::ok);
    CHECK(slurp(dir / "s.csv").rfind("theta,lower,upper\n", 0) == 0);
    CHECK(first_json(r.out).at("pinched") == true);

    r = run({"strip", "--family", "translation", "--rho0", "0.1", "--candidates", "4"});
    CHECK(r.code == cli::numerical);
}

TEST_CASE("ids and gap-label commands") {
    auto r = run({"ids", "--family", "harper", "--lambda", "0", "--energies=-2.5:2.5:21", "--ids-n", "2000", "--n",
                  "20000", "--format", "csv"});
    REQUIRE(r.code == cli::ok);
    std::istringstream csv(r.out);
    std::string line;
    std::getline(csv, line);
    CHECK(line == "E,rho,err,ids,gap_label");
    while (std::getline(csv, line)) {
        std::vector<double> v;
        std::stringstream ss(line);
        std::string cell;
        for (int i = 0; i < 4 && std::getline(ss, cell, ','); ++i)
            v.push_back(std::stod(cell));
        CHECK(std::abs(v[1] - oracle::free_ids(v[0])) <= 0.01);
        CHECK(std::abs(v[3] - oracle::free_ids(v[0])) <= 0.01);
    }

    r = run({"gap-label", "--family", "harper", "--lambda", "2", "--energy-range=1.2,1.8", "--n", "20000"});
    REQUIRE(r.code == cli::ok);
    CHECK(first_json(r.out).at("k") == 1);

    r = run({"ids", "--family", "arnold"});
    CHECK(r.code == cli::config);
}

TEST_CASE("exit codes") {
    CHECK(run({}).code == cli::config);
    CHECK(run({"rho", "--bogus", "1"}).code == cli::config);
    CHECK(run({"rho", "--family", "arnold", "--alpha", "2"}).code == cli::config);
    CHECK(run({"rho", "--family", "arnold", "--rho0", "0.2"}).code == cli::config);
    CHECK(run({"rho", "--family", "arnold", "--alpha", "nan"}).code == cli::config);
    CHECK(run({"rho", "--method", "magic"}).code == cli::config);
    CHECK(run({"sweep", "--axis", "tau:0:1:3"}).code == cli::config);
    CHECK(run({"rho", "--function", "table", "--family", "arnold", "--beta", "1", "--table-file",
               "/nonexistent/table.txt"})
              .code == cli::io);
    CHECK(run({"sweep", "--axis", "rho0:0:1:3", "--out", "/proc/qpf/forbidden/x"}).code == cli::io);
    CHECK(run({"--help"}).code == cli::ok);
}

TEST_CASE("config file with flag overrides") {
    const auto dir = scratch("config");
    const auto cfg = dir / "run.ini";
    std::ofstream(cfg) << "family = arnold\nalpha = 0.5\ntau = 0.3\nn = 5000\n";
    auto r = run({"--config", cfg.string(), "rho"});
    REQUIRE(r.code == cli::ok);
    const double from_file = first_json(r.out).at("value").get<double>();
    CHECK(from_file > 0.0);

    r = run({"--config", cfg.string(), "--tau", "0", "rho"});
    REQUIRE(r.code == cli::ok);
    CHECK(std::abs(first_json(r.out).at("value").get<double>()) <= 1e-9);

    std::ofstream(cfg) << "family = arnold\nalhpa = 0.5\n";
    CHECK(run({"--config", cfg.string(), "rho"}).code == cli::config);
}

TEST_CASE("cache returns byte-identical results with a provenance note") {
    const auto dir = scratch("cache");
    const auto out_dir = scratch("cache_out");
    const std::vector<std::string> args{"sweep",   "--family", "arnold",   "--alpha", "0.7",
                                        "--axis",  "tau:0:0.2:9", "--n",   "3000",    "--cache-dir",
                                        dir.string(), "--out", (out_dir / "a").string()};
    const auto fresh = run(args);
    REQUIRE(fresh.code == cli::ok);
    const auto fresh_file = slurp(out_dir / "a.json");
    CHECK(fresh.err.empty());
    fs::remove(out_dir / "a.json");

    const auto cached = run(args);
    REQUIRE(cached.code == cli::ok);
    CHECK(cached.out == fresh.out);
    CHECK(slurp(out_dir / "a.json") == fresh_file);
    CHECK(cached.err.find("cache hit") != std::string::npos);

    // --jobs does not enter the key; other settings do.
    auto more = args;
    more.insert(more.begin(), {"--jobs", "3"});
    CHECK(run(more).err.find("cache hit") != std::string::npos);
    auto other = args;
    other[8] = "3001";
    CHECK(run(other).err.find("cache hit") == std::string::npos);

    setenv("QPF_CACHE_DIR", dir.string().c_str(), 1);
    const std::vector<std::string> env_args{"rho", "--n", "777"};
    run(env_args);
    CHECK(run(env_args).err.find("cache hit") != std::string::npos);
    unsetenv("QPF_CACHE_DIR");
}

TEST_CASE("repeated commands are byte-identical") {
    for (const auto& args : std::vector<std::vector<std::string>>{
             {"rho", "--family", "arnold", "--alpha", "0.8", "--beta", "0.3", "--tau", "0.3", "--seeds", "6",
              "--seed", "42", "--n", "5000"},
             {"probe", "--family", "arnold", "--alpha", "0.9", "--n", "3000", "--jobs", "2"},
             {"annulus", "--family", "arnold", "--alpha", "0.9", "--beta", "0.05", "--grid", "512"}}) {
        const auto a = run(args);
        const auto b = run(args);
        CHECK(a.code == cli::ok);
        CHECK(a.out == b.out);
    }
    const auto s1 = run({"rho", "--seed", "1", "--n", "100"});
    const auto s2 = run({"rho", "--seed", "2", "--n", "100"});
    CHECK(first_json(s1.out).at("seeds") != first_json(s2.out).at("seeds"));
}

TEST_CASE("content hash") {
    CHECK(cli::content_hash("") == "cbf29ce484222325");
    CHECK(cli::content_hash("a") == "af63dc4c8601ec8c");
    CHECK(cli::content_hash("abc") != cli::content_hash("acb"));
}

TEST_CASE("numbers serialise to the shortest round-tripping form") {
    CHECK(format_double(0.1) == "0.10000000000000001");
    CHECK(format_double(0.25) == "0.25");
    CHECK_THROWS_AS(format_double(INFINITY), NonFinite);
    CHECK(dump_json(json{{"b", 1}, {"a", 0.5}}) == R"({"a":0.5,"b":1})");
}

TEST_CASE("property: JSON records round-trip") {
    std::mt19937_64 rng(99);
    std::uniform_real_distribution<double> u(-1e3, 1e3);
    std::uniform_int_distribution<long> i(-50, 50);
    for (int t = 0; t < 1000; ++t) {
        RotationEstimate e{u(rng), std::abs(u(rng)), static_cast<std::size_t>(t + 1),
                           {{u(rng), u(rng)}, {u(rng), u(rng)}}, t % 2 ? EstimatorMethod::plain
                                                                       : EstimatorMethod::weighted,
                           {u(rng), u(rng)}};
        CHECK(json::parse(dump_json(json(e))).get<RotationEstimate>() == e);

        const RationalRelation r{i(rng), std::abs(i(rng)), std::abs(i(rng)) + 1, std::abs(i(rng)) + 1,
                                 std::abs(u(rng))};
        CHECK(json::parse(dump_json(json(r))).get<RationalRelation>() == r);

        const DeviationSample d{static_cast<std::size_t>(t), u(rng), u(rng), u(rng)};
        CHECK(json::parse(dump_json(json(d))).get<DeviationSample>() == d);

        MonotonicityVerdict v;
        v.kind = static_cast<MonotonicityKind>(t % 5);
        v.epsilon_grid = {{u(rng), e}, {0.0, e}};
        if (t % 3)
            v.plateau = std::make_pair(u(rng), u(rng));
        CHECK(json::parse(dump_json(json(v))).get<MonotonicityVerdict>() == v);

        const FamilySpec f{t % 2 ? "arnold" : "harper", {{"alpha", u(rng)}, {"omega", u(rng)}}, "table",
                           {u(rng), u(rng), u(rng)}};
        CHECK(json::parse(dump_json(json(f))).get<FamilySpec>() == f);

        const Axis a{"tau", u(rng), u(rng), static_cast<std::size_t>(t + 2)};
        CHECK(json::parse(dump_json(json(a))).get<Axis>() == a);
    }
}

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <filesystem>
#include <iostream>
#include <set>
#include <sstream>
#include <unistd.h>

#include "tbg/cli.hpp"
#include "tbg/error.hpp"
#include "tbg/io.hpp"

using namespace tbg;
namespace fs = std::filesystem;

namespace {

struct TempDir {
    fs::path path;
    TempDir() {
        path = fs::temp_directory_path() / ("tbg_cli_" + std::to_string(::getpid()));
        fs::create_directories(path);
    }
    ~TempDir() { fs::remove_all(path); }
    std::string operator/(const std::string& name) const { return (path / name).string(); }
};

const TempDir& tmp() {
    static TempDir d;
    return d;
}

std::string reference_file() {
    const std::string p = tmp() / "ref.json";
    io::write_text_file(p, io::potential_json({{{{1, 0}, 1.0}}, 1}).dump(2));
    return p;
}

struct Run {
    int code;
    std::string err;
};

Run run(std::vector<std::string> args) {
    args.insert(args.begin(), "tbg");
    std::ostringstream err;
    auto* old = std::cerr.rdbuf(err.rdbuf());
    const int code = run_cli(args);
    std::cerr.rdbuf(old);
    return {code, err.str()};
}

}  // namespace

TEST_CASE("angles command") {
    const std::string out = tmp() / "angles.json";
    REQUIRE(run({"angles", "--a-max", "3", "--out", out}).code == 0);
    const io::json t = io::read_json_file(out);
    REQUIRE(t.size() == 3);
    std::set<std::pair<int, int>> pairs;
    for (const auto& r : t) {
        pairs.insert({r["a"].get<int>(), r["b"].get<int>()});
        const auto a = r["a"].get<std::int64_t>(), b = r["b"].get<std::int64_t>();
        const bool three = a % 3 == 0, odd = (a * b) % 2 != 0;
        const std::string cls = r["alpha_class"];
        CHECK(cls == std::string(three ? (odd ? "8pi" : "4pi") : (odd ? "2" : "1")));
        CHECK(r["superlattice"] == (three ? "LambdaStar" : "Lambda"));
    }
    CHECK(pairs == std::set<std::pair<int, int>>{{2, 1}, {3, 1}, {3, 2}});
    for (std::size_t i = 1; i < t.size(); ++i) CHECK(t[i - 1]["theta_rad"] <= t[i]["theta_rad"]);

    REQUIRE(run({"angles", "--a-max", "2", "--out", out}).code == 0);
    const io::json two = io::read_json_file(out);
    REQUIRE(two.size() == 1);
    CHECK(two[0]["N"].get<double>() == doctest::Approx(std::sqrt(7.0)).epsilon(1e-14));
}

TEST_CASE("exit codes") {
    const std::string ref = reference_file();
    CHECK(run({"angles", "--a-max", "1"}).code == 2);
    CHECK(run({"dirac", "--potential", ref, "--a", "4", "--b", "2"}).code == 2);
    CHECK(run({"dirac", "--potential", ref, "--stacking", "AC", "--a", "2", "--b", "1"}).code == 2);
    CHECK(run({"nonsense"}).code == 2);
    CHECK(run({"dirac", "--potential", ref, "--a", "2", "--b", "1", "--cutoff-shells", "40", "--out",
               tmp() / "x.json"}).code == 3);
    const Run missing = run({"dirac", "--potential", "/no/such/potential.json"});
    CHECK(missing.code == 4);
    CHECK(missing.err.find("/no/such/potential.json") != std::string::npos);
    CHECK(run({"angles", "--out", "/no/such/dir/out.json"}).code == 4);
    CHECK(run({"--help"}).code == 0);
}

TEST_CASE("potential dump feeds dirac unchanged") {
    const std::string ref = reference_file();
    const std::string dump = tmp() / "twisted.json";
    const std::string direct = tmp() / "direct.json", via = tmp() / "via.json";
    REQUIRE(run({"potential", "--potential", ref, "--a", "2", "--b", "1", "--out", dump}).code == 0);
    REQUIRE(run({"dirac", "--potential", ref, "--a", "2", "--b", "1", "--out", direct}).code == 0);
    REQUIRE(run({"dirac", "--twisted", dump, "--out", via}).code == 0);
    CHECK(io::read_text_file(direct) == io::read_text_file(via));

    const io::json d = io::read_json_file(direct);
    CHECK(d["multiplicity"] == 2);
    CHECK(d["status"] == "ok");
    CHECK(d["condition"] == "second-order sum != 0");
    CHECK(d["a"] == 2);

    const io::TwistedDump back = io::parse_twisted(io::read_json_file(dump));
    const FourierPotential W = twist(build_cosine_family({{{1, 0}, 1.0}}, 1), {classify_angle(2, 1)});
    CHECK(back.W.coefficients == W.coefficients);
    CHECK(io::twisted_json(back) == io::read_json_file(dump));
}

TEST_CASE("free dirac on the superlattice") {
    const std::string ref = reference_file();
    const std::string out = tmp() / "free.json";
    REQUIRE(run({"dirac", "--potential", ref, "--a", "2", "--b", "1", "--lambda", "0", "--cutoff-shells", "4",
                 "--out", out}).code == 0);
    const io::json d = io::read_json_file(out);
    CHECK(d["multiplicity"] == 3);
    CHECK(d["v_d_magnitude"].get<double>() == doctest::Approx(4 * kPi / 3 / std::sqrt(7.0)).epsilon(1e-12));
}

TEST_CASE("bands at lambda 0 are free") {
    const std::string ref = reference_file();
    const std::string out = tmp() / "bands.csv";
    REQUIRE(run({"bands", "--potential", ref, "--lambda", "0", "--path", "K,G", "--samples", "10", "--n-bands",
                 "4", "--cutoff-shells", "4", "--out", out}).code == 0);
    const BandTable t = io::parse_bands_csv(io::read_text_file(out));
    REQUIRE(t.ks.size() == 11);
    const Mat2 k = kappa_matrix();
    for (std::size_t i = 0; i < t.ks.size(); ++i) {
        std::vector<double> e;
        for (int x = -6; x <= 6; ++x)
            for (int y = -6; y <= 6; ++y) e.push_back((t.ks[i] + k * Vec2(x, y)).squaredNorm());
        std::sort(e.begin(), e.end());
        for (int j = 0; j < 4; ++j) CHECK(t.energies[i][j] == doctest::Approx(e[j]).epsilon(1e-12));
    }
}

TEST_CASE("thread count does not change output") {
    const std::string ref = reference_file();
    std::string prev_b, prev_s;
    for (const char* th : {"1", "4"}) {
        const std::string b = tmp() / (std::string("b") + th + ".csv");
        const std::string s = tmp() / (std::string("s") + th + ".csv");
        REQUIRE(run({"bands", "--potential", ref, "--a", "2", "--b", "1", "--cutoff-shells", "5", "--samples",
                     "6", "--threads", th, "--out", b}).code == 0);
        REQUIRE(run({"scaling", "--potential", ref, "--angles", "2:1,5:1,4:1,7:2", "--threads", th, "--out", s})
                    .code == 0);
        const std::string tb = io::read_text_file(b), ts = io::read_text_file(s);
        if (!prev_b.empty()) {
            CHECK(tb == prev_b);
            CHECK(ts == prev_s);
        }
        prev_b = tb;
        prev_s = ts;
    }
    CHECK(prev_s.rfind("a,b,N,lambda,vd_abs,N_times_vd,flag\n", 0) == 0);
}

TEST_CASE("config file") {
    const std::string ref = reference_file();
    const std::string cfg = tmp() / "cfg.json";
    const std::string a = tmp() / "cfg_a.json", b = tmp() / "cfg_b.json";
    io::write_text_file(cfg, io::json{{"command", "dirac"},
                                      {"potential", ref},
                                      {"a", 2},
                                      {"b", 1},
                                      {"lambda", 0.3},
                                      {"cutoff-shells", 5},
                                      {"out", a}}
                                 .dump());
    REQUIRE(run({"--config", cfg}).code == 0);
    REQUIRE(run({"dirac", "--potential", ref, "--a", "2", "--b", "1", "--lambda", "0.3", "--cutoff-shells", "5",
                 "--out", b}).code == 0);
    CHECK(io::read_text_file(a) == io::read_text_file(b));

    // command line wins over the file
    REQUIRE(run({"dirac", "--config", cfg, "--lambda", "0.2", "--out", b}).code == 0);
    CHECK(io::read_json_file(b)["lambda"].get<double>() == 0.2);
    CHECK(run({"--config", tmp() / "missing.json"}).code == 4);
}

TEST_CASE("round trips") {
    SUBCASE("potential") {
        const io::PotentialFile p{{{{1, 0}, 1.0}, {{2, 1}, 0.1 + 1e-17}}, -1};
        const io::PotentialFile q = io::parse_potential(io::json::parse(io::potential_json(p).dump()));
        REQUIRE(q.orbits.size() == 2);
        CHECK(q.sign == -1);
        CHECK(q.orbits[1].m == IVec2{2, 1});
        CHECK(q.orbits[1].a == p.orbits[1].a);
        CHECK_THROWS_AS(io::parse_potential(io::json{{"orbits", 3}}), InvalidInput);
        CHECK_THROWS_AS(io::parse_potential(io::json{{"sign", "*"}, {"orbits", io::json::array()}}), InvalidInput);
    }
    SUBCASE("bands") {
        BandTable t;
        t.ks = {Vec2(0.1, 1.0 / 3), Vec2(-2.0 / 7, 1e-300)};
        t.energies = {{1.0 / 3, 2.0 / 3}, {std::sqrt(2.0), kPi}};
        const BandTable u = io::parse_bands_csv(io::bands_csv(t));
        CHECK(u.ks == t.ks);
        CHECK(u.energies == t.energies);
    }
    SUBCASE("twisted AB with complex modes") {
        TwistSpec spec{classify_angle(5, 2)};
        spec.stacking = Stacking::AB;
        const FourierPotential W = twist(build_cosine_family({{{1, 0}, 1.0}}, 1), spec);
        const io::TwistedDump d = io::parse_twisted(io::json::parse(io::twisted_json({spec, W}).dump()));
        CHECK(d.W.coefficients == W.coefficients);
        CHECK(d.spec.stacking == Stacking::AB);
        CHECK(d.W.lattice.dual == W.lattice.dual);
    }
    SUBCASE("dirac and consistency json") {
        DiracReport r;
        r.E0 = 1.0 / 3;
        r.v_d_formula = {0.1, -2.0 / 3};
        const io::json j = io::json::parse(io::dirac_json(r).dump());
        CHECK(j["E0"].get<double>() == r.E0);
        CHECK(j["v_d_formula"]["im"].get<double>() == r.v_d_formula.imag());
        CHECK(j["cone_fit_slope"].is_null());
        CHECK(j["separation_from_sector1"].is_null());
    }
    SUBCASE("format") {
        for (double x : {1.0 / 3, kPi, 1e-300, -2.5e17, 0.1}) CHECK(std::stod(io::format_double(x)) == x);
    }
}

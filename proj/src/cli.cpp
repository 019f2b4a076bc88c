#include "tbg/cli.hpp"

#include <CLI11.hpp>
#include <cstdlib>
#include <iostream>
#include <sstream>

#include "tbg/error.hpp"
#include "tbg/io.hpp"

namespace tbg {

namespace {

using io::json;

struct RunConfig {
    std::int64_t a_max = 10;
    std::int64_t a = 0;
    std::int64_t b = 0;
    std::string stacking = "AA";
    std::string combiner = "additive";
    bool flip = false;
    double lambda = 0.5;
    double cutoff_shells = 8;
    double ring_radius = 0;  // 0 picks a radius from the spectral gap
    int n_angles = 16;
    std::string potential_path;
    std::string twisted_path;
    std::string output_path = "-";
    std::string path = "K,G,M,K";
    int samples = 24;
    int n_bands = 8;
    std::string angles = "2:1,5:1,7:1,8:1";
    double delta = 1;
    double cutoff_factor = 2.2;
    std::vector<double> lambdas{1e-3, 2e-3, 4e-3, 8e-3};
    int threads = 1;
};

int default_threads() {
    if (const char* env = std::getenv("TBG_THREADS")) {
        try {
            const int t = std::stoi(env);
            if (t >= 1) return t;
        } catch (...) {
        }
    }
    return 1;
}

// the working potential together with its lattice data
struct Setup {
    FourierPotential W;
    SymmetryData sym;
    Vec2 K;
    bool twisted = false;
    TwistSpec spec;
};

Setup load_setup(const RunConfig& c) {
    Setup s;
    if (!c.twisted_path.empty()) {
        const io::TwistedDump d = io::parse_twisted(io::read_json_file(c.twisted_path));
        s.W = d.W;
        s.spec = d.spec;
        s.twisted = true;
    } else {
        if (c.potential_path.empty()) throw InvalidInput("need --potential or --twisted");
        const io::PotentialFile p = io::parse_potential(io::read_json_file(c.potential_path));
        const FourierPotential V = build_cosine_family(p.orbits, p.sign);
        if (c.a == 0 && c.b == 0) {
            s.W = V;
        } else {
            s.spec.data = classify_angle(c.a, c.b);
            s.spec.stacking = io::parse_stacking(c.stacking);
            if (c.combiner != "additive" && c.combiner != "product")
                throw InvalidInput("combiner must be additive or product");
            s.spec.combiner = c.combiner == "additive" ? Combiner::Additive : Combiner::PointwiseProduct;
            s.spec.flip = c.flip;
            s.W = twist(V, s.spec);
            s.twisted = true;
        }
    }
    s.sym = symmetry_data(s.W.lattice.kind, KPoint::K);
    s.K = high_symmetry_points(s.W.lattice).K;
    return s;
}

PlaneWaveBasis make_basis(const Setup& s, const RunConfig& c) {
    if (!(c.cutoff_shells > 0)) throw InvalidInput("--cutoff-shells must be positive");
    return build_basis(s.sym, s.W.lattice.dual, s.K, c.cutoff_shells * s.W.lattice.dual.col(0).norm());
}

void check_positive(double x, const char* name) {
    if (!(x > 0)) throw InvalidInput(std::string(name) + " must be positive");
}

void cmd_angles(const RunConfig& c) {
    io::write_text_file(c.output_path, io::angle_table(c.a_max).dump(2) + "\n");
}

void cmd_potential(const RunConfig& c) {
    if (c.a == 0 || c.b == 0) throw InvalidInput("potential needs --a and --b");
    const Setup s = load_setup(c);
    io::write_text_file(c.output_path, io::twisted_json({s.spec, s.W}).dump(2) + "\n");
}

Vec2 named_point(const std::string& name, const Setup& s) {
    if (name == "K") return s.K;
    if (name == "Kp" || name == "K'") return -s.K;
    if (name == "G" || name == "Gamma") return Vec2::Zero();
    if (name == "M") return s.W.lattice.dual.col(0) / 2;
    throw InvalidInput("unknown k point " + name + " (use K, Kp, G, M)");
}

void cmd_bands(const RunConfig& c, const ParallelMap& pmap) {
    if (c.n_bands < 1 || c.samples < 1) throw InvalidInput("--n-bands and --samples must be positive");
    const Setup s = load_setup(c);
    const PlaneWaveBasis basis = make_basis(s, c);
    std::vector<Vec2> corners;
    std::stringstream ss(c.path);
    for (std::string tok; std::getline(ss, tok, ',');) corners.push_back(named_point(tok, s));
    const BandTable t = band_path(basis, s.W, c.lambda, sample_path(corners, c.samples),
                                  static_cast<std::size_t>(c.n_bands), pmap);
    io::write_text_file(c.output_path, io::bands_csv(t));
}

void cmd_dirac(const RunConfig& c, const ParallelMap& pmap) {
    if (c.lambda < 0) throw InvalidInput("--lambda must be non-negative");
    if (c.ring_radius < 0) throw InvalidInput("--ring-radius must be non-negative");
    const Setup s = load_setup(c);
    const PlaneWaveBasis basis = make_basis(s, c);

    const cplx fw = fw_condition(s.W, s.sym);
    const PerturbationReport pert = perturbation_report(s.W, basis);
    std::string condition = "inconclusive";
    if (std::abs(fw) > kZeroThreshold)
        condition = "FW coefficient != 0";
    else if (pert.zero_pattern_ok && !pert.sum.inconclusive)
        condition = "second-order sum != 0";

    DiracReport rep = find_dirac(basis, s.W, c.lambda);
    json out = io::dirac_json(rep);
    if (rep.status == DiracStatus::Ok || rep.status == DiracStatus::Triple) {
        const double r = c.ring_radius > 0 ? c.ring_radius : default_ring_radius(basis, rep);
        const ConeFit f = cone_fit(basis, s.W, c.lambda, rep, r, c.n_angles, pmap);
        rep.cone_fit_slope = f.slope;
        rep.cone_fit_residual = f.residual;
        out = io::dirac_json(rep);
        out["ring_radius"] = r;
        out["cone_fit_min_overlap"] = f.min_overlap;
        out["cone_fit_ambiguous"] = f.ambiguous;
    }
    out["condition"] = condition;
    out["fw_value"] = {fw.real(), fw.imag()};
    out["second_order_sum"] = pert.sum.total.real();
    out["zero_pattern_ok"] = pert.zero_pattern_ok;
    out["twisted"] = s.twisted;
    if (s.twisted) {
        out["a"] = s.spec.data.a;
        out["b"] = s.spec.data.b;
        out["stacking"] = io::stacking_name(s.spec.stacking);
    }
    io::write_text_file(c.output_path, out.dump(2) + "\n");
}

std::vector<std::pair<std::int64_t, std::int64_t>> parse_angles(const std::string& text) {
    std::vector<std::pair<std::int64_t, std::int64_t>> out;
    std::stringstream ss(text);
    for (std::string tok; std::getline(ss, tok, ',');) {
        const auto colon = tok.find(':');
        if (colon == std::string::npos) throw InvalidInput("angle must look like a:b, got " + tok);
        try {
            out.emplace_back(std::stoll(tok.substr(0, colon)), std::stoll(tok.substr(colon + 1)));
        } catch (const std::exception&) {
            throw InvalidInput("bad angle " + tok);
        }
    }
    return out;
}

void cmd_scaling(const RunConfig& c, const ParallelMap& pmap) {
    if (c.potential_path.empty()) throw InvalidInput("scaling needs --potential");
    check_positive(c.delta, "--delta");
    check_positive(c.cutoff_factor, "--cutoff-factor");
    const io::PotentialFile p = io::parse_potential(io::read_json_file(c.potential_path));
    ScalingOptions opts;
    opts.delta = c.delta;
    opts.cutoff_factor = c.cutoff_factor;
    opts.stacking = io::parse_stacking(c.stacking);
    const ScalingTable t =
        scaling_study(build_cosine_family(p.orbits, p.sign), parse_angles(c.angles), opts, pmap);
    io::write_text_file(c.output_path, io::scaling_csv(t));
}

void cmd_perturb(const RunConfig& c, const ParallelMap& pmap) {
    const Setup s = load_setup(c);
    const PlaneWaveBasis basis = make_basis(s, c);
    const ConsistencyReport r = consistency_check(s.W, basis, c.lambdas, pmap);
    io::write_text_file(c.output_path, io::consistency_json(r).dump(2) + "\n");
}

void cmd_lambda_scan(const RunConfig& c, const ParallelMap& pmap) {
    const Setup s = load_setup(c);
    const PlaneWaveBasis basis = make_basis(s, c);
    for (double l : c.lambdas)
        if (l < 0) throw InvalidInput("lambda values must be non-negative");
    const auto reps = pmap(c.lambdas.size(), [&](std::size_t i) { return find_dirac(basis, s.W, c.lambdas[i]); });
    std::ostringstream os;
    os << "lambda,status,multiplicity,E0,vd_abs,separation_from_sector1\n";
    for (const DiracReport& r : reps)
        os << io::format_double(r.lambda) << ',' << dirac_status_name(r.status) << ',' << r.multiplicity << ','
           << io::format_double(r.E0) << ',' << io::format_double(r.v_d_magnitude) << ','
           << io::format_double(r.separation_from_sector1) << '\n';
    io::write_text_file(c.output_path, os.str());
}

// config values become "--key value" arguments placed before the explicit ones,
// so flags given on the command line win
std::vector<std::string> config_args(const std::string& path, std::string& command) {
    const json j = io::read_json_file(path);
    if (!j.is_object()) throw InvalidInput(path + ": config must be a JSON object");
    std::vector<std::string> out;
    for (const auto& [key, val] : j.items()) {
        if (key == "command") {
            command = val.get<std::string>();
            continue;
        }
        const std::string flag = "--" + key;
        if (val.is_boolean()) {
            if (val.get<bool>()) out.push_back(flag);
        } else if (val.is_array()) {
            out.push_back(flag);
            for (const auto& v : val) out.push_back(v.is_string() ? v.get<std::string>() : v.dump());
        } else {
            out.push_back(flag);
            out.push_back(val.is_string() ? val.get<std::string>() : val.dump());
        }
    }
    return out;
}

}  // namespace

int run_cli(const std::vector<std::string>& raw) {
    RunConfig c;
    c.threads = default_threads();
    try {
        std::vector<std::string> args(raw.begin() + (raw.empty() ? 0 : 1), raw.end());
        for (std::size_t i = 0; i + 1 < args.size(); ++i) {
            if (args[i] != "--config") continue;
            std::string command;
            std::vector<std::string> extra = config_args(args[i + 1], command);
            args.erase(args.begin() + static_cast<long>(i), args.begin() + static_cast<long>(i) + 2);
            std::size_t at = 0;
            static const std::vector<std::string> commands{"angles", "potential", "bands", "dirac",
                                                           "scaling", "perturb", "lambda-scan"};
            if (!args.empty() && std::find(commands.begin(), commands.end(), args[0]) != commands.end())
                at = 1;
            else if (!command.empty())
                args.insert(args.begin(), command), at = 1;
            args.insert(args.begin() + static_cast<long>(at), extra.begin(), extra.end());
            break;
        }

        CLI::App app{"Commensurate twisted bilayer honeycomb potentials: spectra and Dirac cones"};
        app.option_defaults()->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);
        app.require_subcommand(1);
        std::string config_unused;
        app.add_option("--config", config_unused, "JSON file with option values");

        auto common = [&](CLI::App* s) {
            s->add_option("--out", c.output_path, "output file, - for stdout");
            s->add_option("--threads", c.threads, "worker threads (default TBG_THREADS or 1)")
                ->check(CLI::PositiveNumber);
        };
        auto lattice = [&](CLI::App* s) {
            s->add_option("--potential", c.potential_path, "cosine-family potential JSON");
            s->add_option("--twisted", c.twisted_path, "twisted potential dump JSON");
            s->add_option("--a", c.a, "commensuration integer a");
            s->add_option("--b", c.b, "commensuration integer b");
            s->add_option("--stacking", c.stacking, "AA or AB");
            s->add_option("--combiner", c.combiner, "additive or product");
            s->add_flag("--flip", c.flip, "twist by -theta");
            s->add_option("--cutoff-shells", c.cutoff_shells, "basis radius in units of |k1|");
        };

        auto* angles = app.add_subcommand("angles", "table of commensurate angles");
        angles->add_option("--a-max", c.a_max, "largest a");
        common(angles);

        auto* pot = app.add_subcommand("potential", "twist a cosine-family potential and dump it");
        lattice(pot);
        common(pot);

        auto* bands = app.add_subcommand("bands", "band energies along a k path");
        lattice(bands);
        bands->add_option("--lambda", c.lambda, "coupling strength");
        bands->add_option("--path", c.path, "comma separated corners from K, Kp, G, M");
        bands->add_option("--samples", c.samples, "samples per segment");
        bands->add_option("--n-bands", c.n_bands, "number of bands");
        common(bands);

        auto* dirac = app.add_subcommand("dirac", "Dirac point report at K");
        lattice(dirac);
        dirac->add_option("--lambda", c.lambda, "coupling strength");
        dirac->add_option("--ring-radius", c.ring_radius, "cone fit radius, 0 for automatic");
        dirac->add_option("--n-angles", c.n_angles, "cone fit angles");
        common(dirac);

        auto* scaling = app.add_subcommand("scaling", "N |v_d| over a family of angles, lambda = delta / N^2");
        scaling->add_option("--potential", c.potential_path, "cosine-family potential JSON");
        scaling->add_option("--angles", c.angles, "list like 2:1,5:1");
        scaling->add_option("--delta", c.delta, "lambda N^2");
        scaling->add_option("--cutoff-factor", c.cutoff_factor, "basis radius in units of the unit-lattice |k1|");
        scaling->add_option("--stacking", c.stacking, "AA or AB");
        common(scaling);

        auto* perturb = app.add_subcommand("perturb", "second-order perturbation model against exact sector energies");
        lattice(perturb);
        perturb->add_option("--lambdas", c.lambdas, "small coupling values")->multi_option_policy(CLI::MultiOptionPolicy::TakeAll);
        common(perturb);

        auto* scan = app.add_subcommand("lambda-scan", "Dirac detection over a lambda grid");
        lattice(scan);
        scan->add_option("--lambdas", c.lambdas, "coupling values")->multi_option_policy(CLI::MultiOptionPolicy::TakeAll);
        common(scan);

        std::reverse(args.begin(), args.end());
        try {
            app.parse(args);
        } catch (const CLI::ParseError& e) {
            const int code = app.exit(e);
            return code == 0 ? 0 : 2;
        }
        const ParallelMap pmap(c.threads);
        if (angles->parsed()) cmd_angles(c);
        if (pot->parsed()) cmd_potential(c);
        if (bands->parsed()) cmd_bands(c, pmap);
        if (dirac->parsed()) cmd_dirac(c, pmap);
        if (scaling->parsed()) cmd_scaling(c, pmap);
        if (perturb->parsed()) cmd_perturb(c, pmap);
        if (scan->parsed()) cmd_lambda_scan(c, pmap);
        return 0;
    } catch (const InvalidInput& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    } catch (const ComputeGuard& e) {
        std::cerr << "compute guard: " << e.what() << '\n';
        return 3;
    } catch (const IoError& e) {
        std::cerr << "io error: " << e.what() << '\n';
        return 4;
    } catch (const std::exception& e) {
        std::cerr << "internal error: " << e.what() << '\n';
        return 1;
    }
}

int run_cli(int argc, const char* const* argv) {
    return run_cli(std::vector<std::string>(argv, argv + argc));
}

}  // namespace tbg

#include "tbg/io.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "tbg/error.hpp"

namespace tbg::io {

std::string format_double(double x) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

json angle_record(const CommensurationData& d) {
    return json{{"a", d.a},
                {"b", d.b},
                {"theta_rad", d.theta},
                {"epsilon", d.epsilon},
                {"rho_flag", d.rho_flag},
                {"alpha_class", d.alpha_class()},
                {"N", d.N},
                {"superlattice", d.superlattice == SuperKind::Lambda ? "Lambda" : "LambdaStar"}};
}

json angle_table(std::int64_t a_max) {
    if (a_max < 2) throw InvalidInput("a_max must be at least 2");
    std::vector<CommensurationData> all;
    for (std::int64_t a = 2; a <= a_max; ++a)
        for (std::int64_t b = 1; b < a; ++b)
            if (gcd(a, b) == 1) all.push_back(classify_angle(a, b));
    std::stable_sort(all.begin(), all.end(),
                     [](const auto& x, const auto& y) { return x.theta < y.theta; });
    json arr = json::array();
    for (const auto& d : all) arr.push_back(angle_record(d));
    return arr;
}

namespace {

IVec2 parse_ivec(const json& j) {
    if (!j.is_array() || j.size() != 2 || !j[0].is_number_integer() || !j[1].is_number_integer())
        throw InvalidInput("expected an integer pair, got " + j.dump());
    return {j[0].get<std::int64_t>(), j[1].get<std::int64_t>()};
}

template <class T>
T field(const json& j, const char* key) {
    if (!j.contains(key)) throw InvalidInput(std::string("missing field \"") + key + "\"");
    try {
        return j.at(key).get<T>();
    } catch (const json::exception&) {
        throw InvalidInput(std::string("bad value for field \"") + key + "\"");
    }
}

}  // namespace

PotentialFile parse_potential(const json& j) {
    PotentialFile p;
    if (j.contains("lattice") && field<std::string>(j, "lattice") != "Lambda")
        throw InvalidInput("potential lattice must be \"Lambda\"");
    const std::string sign = j.contains("sign") ? field<std::string>(j, "sign") : "+";
    if (sign != "+" && sign != "-") throw InvalidInput("sign must be \"+\" or \"-\"");
    p.sign = sign == "+" ? 1 : -1;
    if (!j.contains("orbits") || !j["orbits"].is_array()) throw InvalidInput("missing orbits array");
    for (const json& o : j["orbits"]) {
        if (!o.contains("m")) throw InvalidInput("orbit entry without m");
        p.orbits.push_back({parse_ivec(o["m"]), field<double>(o, "a")});
    }
    return p;
}

json potential_json(const PotentialFile& p) {
    json orbits = json::array();
    for (const auto& o : p.orbits) orbits.push_back({{"m", {o.m.x, o.m.y}}, {"a", o.a}});
    return {{"lattice", "Lambda"}, {"sign", p.sign > 0 ? "+" : "-"}, {"orbits", orbits}};
}

std::string stacking_name(Stacking s) { return s == Stacking::AA ? "AA" : "AB"; }

Stacking parse_stacking(const std::string& s) {
    if (s == "AA") return Stacking::AA;
    if (s == "AB") return Stacking::AB;
    throw InvalidInput("stacking must be AA or AB, got " + s);
}

json twisted_json(const TwistedDump& d) {
    json modes = json::array();
    for (const auto& [m, c] : d.W.coefficients)
        modes.push_back({{"m", {m.x, m.y}}, {"re", c.real()}, {"im", c.imag()}});
    return {{"a", d.spec.data.a},
            {"b", d.spec.data.b},
            {"stacking", stacking_name(d.spec.stacking)},
            {"combiner", d.spec.combiner == Combiner::Additive ? "additive" : "product"},
            {"flip", d.spec.flip},
            {"modes", modes}};
}

TwistedDump parse_twisted(const json& j) {
    TwistedDump d;
    d.spec.data = classify_angle(field<std::int64_t>(j, "a"), field<std::int64_t>(j, "b"));
    d.spec.stacking = parse_stacking(field<std::string>(j, "stacking"));
    if (j.contains("combiner")) {
        const std::string c = field<std::string>(j, "combiner");
        if (c != "additive" && c != "product") throw InvalidInput("combiner must be additive or product");
        d.spec.combiner = c == "additive" ? Combiner::Additive : Combiner::PointwiseProduct;
    }
    if (j.contains("flip")) d.spec.flip = field<bool>(j, "flip");
    d.W.lattice = superlattice_basis(d.spec.data);
    d.W.honeycomb = d.spec.stacking == Stacking::AA;
    if (!j.contains("modes") || !j["modes"].is_array()) throw InvalidInput("missing modes array");
    for (const json& m : j["modes"]) {
        if (!m.contains("m")) throw InvalidInput("mode without m");
        d.W.coefficients[parse_ivec(m["m"])] += cplx(field<double>(m, "re"), field<double>(m, "im"));
    }
    return d;
}

std::string bands_csv(const BandTable& t) {
    std::ostringstream os;
    const std::size_t nb = t.energies.empty() ? 0 : t.energies.front().size();
    os << "idx,kx,ky";
    for (std::size_t b = 1; b <= nb; ++b) os << ",E" << b;
    os << '\n';
    for (std::size_t i = 0; i < t.ks.size(); ++i) {
        os << i << ',' << format_double(t.ks[i].x()) << ',' << format_double(t.ks[i].y());
        for (double e : t.energies[i]) os << ',' << format_double(e);
        os << '\n';
    }
    return os.str();
}

BandTable parse_bands_csv(const std::string& text) {
    BandTable t;
    std::istringstream is(text);
    std::string line;
    if (!std::getline(is, line) || line.rfind("idx,kx,ky", 0) != 0)
        throw InvalidInput("bands CSV header missing");
    while (std::getline(is, line)) {
        if (line.empty()) continue;
        std::istringstream ls(line);
        std::string cell;
        std::vector<double> vals;
        while (std::getline(ls, cell, ',')) vals.push_back(std::stod(cell));
        if (vals.size() < 3) throw InvalidInput("short bands CSV row");
        t.ks.emplace_back(vals[1], vals[2]);
        t.energies.emplace_back(vals.begin() + 3, vals.end());
    }
    return t;
}

namespace {

json finite_or_null(double x) { return std::isfinite(x) ? json(x) : json(nullptr); }

}  // namespace

json dirac_json(const DiracReport& r) {
    return {{"status", dirac_status_name(r.status)},
            {"valid", r.valid()},
            {"E0", r.E0},
            {"multiplicity", r.multiplicity},
            {"v_d_formula", {{"re", r.v_d_formula.real()}, {"im", r.v_d_formula.imag()}}},
            {"v_d_magnitude", r.v_d_magnitude},
            {"cone_fit_slope", finite_or_null(r.cone_fit_slope)},
            {"cone_fit_residual", finite_or_null(r.cone_fit_residual)},
            {"lambda", r.lambda},
            {"K_star", {r.K_star.x(), r.K_star.y()}},
            {"separation_from_sector1", finite_or_null(r.separation_from_sector1)},
            {"phi2_by_conjugation", r.phi2_by_conjugation},
            {"basis_size", r.basis_size},
            {"shell_cutoff", r.shell_cutoff},
            {"message", r.message}};
}

std::string scaling_csv(const ScalingTable& t) {
    std::ostringstream os;
    os << "a,b,N,lambda,vd_abs,N_times_vd,flag\n";
    for (const ScalingRow& r : t.rows)
        os << r.a << ',' << r.b << ',' << format_double(r.N) << ',' << format_double(r.lambda) << ','
           << format_double(r.vd_abs) << ',' << format_double(r.N_times_vd) << ',' << r.flag << '\n';
    return os.str();
}

json consistency_json(const ConsistencyReport& r) {
    json sectors = json::object();
    for (std::size_t s = 0; s < 3; ++s) {
        sectors[sector_name(kSectors[s])] = {
            {"E1", r.model.E1.by_sector[s]},
            {"E2", r.model.E2[s]},
            {"energies", r.energies[s]},
            {"remainders", r.remainders[s]},
            {"exponent", finite_or_null(r.exponent[s])},
            {"identically_zero", r.identically_zero[s]}};
    }
    return {{"lambdas", r.lambdas},
            {"E0", r.model.E0},
            {"sectors", sectors},
            {"predicted_split", r.model.predicted_split},
            {"split_from_second_order_sum", r.model.split_from_sum},
            {"second_order_sum", r.model.sum.total.real()},
            {"numerical_split", r.numerical_split},
            {"zero_pattern_ok", r.model.zero_pattern_ok},
            {"inconclusive", r.model.inconclusive},
            {"tracking_failures", r.tracking_failures}};
}

json read_json_file(const std::string& path) {
    const std::string text = read_text_file(path);
    try {
        return json::parse(text);
    } catch (const json::parse_error& e) {
        throw InvalidInput(path + ": " + e.what());
    }
}

std::string read_text_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open " + path);
    std::ostringstream os;
    os << in.rdbuf();
    return os.str();
}

void write_text_file(const std::string& path, const std::string& text) {
    if (path.empty() || path == "-") {
        std::fwrite(text.data(), 1, text.size(), stdout);
        return;
    }
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write " + path);
    out << text;
    if (!out) throw IoError("write failed for " + path);
}

}  // namespace tbg::io

#pragma once

#include <iosfwd>
#include <json.hpp>
#include <string>
#include <vector>

#include "tbg/bloch.hpp"
#include "tbg/perturbation.hpp"

namespace tbg::io {

using nlohmann::json;

std::string format_double(double x);  // %.17g

json angle_record(const CommensurationData& d);
json angle_table(std::int64_t a_max);

struct PotentialFile {
    std::vector<CosineOrbit> orbits;
    int sign = 1;
};

PotentialFile parse_potential(const json& j);
json potential_json(const PotentialFile& p);

struct TwistedDump {
    TwistSpec spec;
    FourierPotential W;
};

json twisted_json(const TwistedDump& d);
TwistedDump parse_twisted(const json& j);

std::string stacking_name(Stacking s);
Stacking parse_stacking(const std::string& s);

std::string bands_csv(const BandTable& t);
BandTable parse_bands_csv(const std::string& text);

json dirac_json(const DiracReport& r);
std::string scaling_csv(const ScalingTable& t);
json consistency_json(const ConsistencyReport& r);

json read_json_file(const std::string& path);
std::string read_text_file(const std::string& path);
void write_text_file(const std::string& path, const std::string& text);

}  // namespace tbg::io

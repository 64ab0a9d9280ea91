#pragma once

#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"
#include "qpf/graphs.hpp"
#include "qpf/harper.hpp"
#include "qpf/rotnum.hpp"
#include "qpf/scan.hpp"

namespace qpf {

using json = nlohmann::json;

// %.17g; enough digits that every double parses back to itself.
std::string format_double(double v);

// Compact JSON with floating point numbers printed by format_double and keys
// in sorted order, so equal values always give equal bytes.
std::string dump_json(const json& j);

void to_json(json& j, const FiberPoint& p);
void from_json(const json& j, FiberPoint& p);
void to_json(json& j, const RotationEstimate& e);
void from_json(const json& j, RotationEstimate& e);
void to_json(json& j, const DeviationSample& d);
void from_json(const json& j, DeviationSample& d);
void to_json(json& j, const RationalRelation& r);
void from_json(const json& j, RationalRelation& r);
void to_json(json& j, const EpsilonSample& s);
void from_json(const json& j, EpsilonSample& s);
void to_json(json& j, const MonotonicityVerdict& v);
void from_json(const json& j, MonotonicityVerdict& v);
void to_json(json& j, const BoundednessReport& r);
void to_json(json& j, const PlateauReport& r);
void to_json(json& j, const FamilySpec& f);
void from_json(const json& j, FamilySpec& f);
void to_json(json& j, const Axis& a);
void from_json(const json& j, Axis& a);
void to_json(json& j, const GraphOverTheta& g);
void to_json(json& j, const IdsEstimate& e);
void to_json(json& j, const GapLabel& g);
void to_json(json& j, const BoundaryResult& b);
void to_json(json& j, const PinchMeasure& p);

// CSV with a header row; numbers through format_double.
void write_graph_csv(std::ostream& out, const GraphOverTheta& graph);
void write_strip_csv(std::ostream& out, const Strip& strip);
void write_sweep_csv(std::ostream& out, const std::string& param, std::span<const SweepPoint> sweep);
void write_sweep_csv(std::ostream& out, const SweepGrid& grid);

// Little-endian IEEE doubles, row-major, shape [2, n1, n2]: plane 0 holds
// rho, plane 1 the error radius.
void write_grid_binary(std::ostream& out, const SweepGrid& grid);
json grid_sidecar(const SweepGrid& grid, const std::string& binary_name);

}  // namespace qpf

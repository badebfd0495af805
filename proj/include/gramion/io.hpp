#pragma once

#include <cstdint>
#include <filesystem>
#include <string>

#include <json.hpp>

#include "gramion/gramian.hpp"
#include "gramion/hypnet.hpp"
#include "gramion/matrix.hpp"
#include "gramion/reduce.hpp"
#include "gramion/sysmodel.hpp"

namespace gramion::io {

using Json = nlohmann::ordered_json;
namespace fs = std::filesystem;

// All readers and writers throw IoError naming the path on file or parse
// problems, and ValidationError when the content is well formed but invalid.

Json read_json(const fs::path& path);
void write_json(const fs::path& path, const Json& doc);
std::string read_text(const fs::path& path);
void write_text(const fs::path& path, const std::string& text);

/// 64-bit FNV-1a, as 16 lowercase hex digits.
std::string fnv1a_hex(const std::string& bytes);

Json to_json(const Matrix& m);
Matrix matrix_from_json(const Json& j, const std::string& what);

Json to_json(const hypnet::HyperbolicNetwork& net);
/// Rebuilds nodes from config and angles and checks the stored edges against
/// the connection rule.
hypnet::HyperbolicNetwork network_from_json(const Json& j);

/// Model file. `stabilization_offset` is recorded next to the explicit shift.
Json to_json(const sysmodel::LtvSystem& sys, double stabilization_offset);
sysmodel::LtvSystem system_from_json(const Json& j);

Json to_json(const reduce::ReducedModel& model, const Json& provenance);
reduce::ReducedModel reduced_from_json(const Json& j);

Matrix read_matrix_csv(const fs::path& path);
void write_matrix_csv(const fs::path& path, const Matrix& m);
std::string matrix_csv(const Matrix& m);

/// Joint gramian stored as the n x (n + p) block row (W_X | W_M).
Matrix joint_to_matrix(const gramian::JointGramian& wj);
gramian::JointGramian joint_from_matrix(const Matrix& m, std::size_t n);

/// Header "t,y1,...,yO", one row per grid point, 17 significant digits.
std::string trajectory_csv(const sysmodel::Trajectory& traj);

/// Column CSV "index,value" of a sequence.
std::string sequence_csv(std::span<const double> values, const std::string& name);

}  // namespace gramion::io

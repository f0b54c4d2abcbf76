#pragma once

// Model files: one JSON document per manifold. See docs/model-format.md.

#include "kmu/model.hpp"

#include <json.hpp>

#include <filesystem>

namespace kmu {

/// Parses and validates a model document. Throws SchemaError (with the field
/// path), ConstraintViolated, FrameRankDeficient, or expression errors.
ManifoldModel model_from_json(const nlohmann::json& doc, double tol = kDefaultTolerance);

nlohmann::json model_to_json(const ManifoldModel& model);

/// Reads `path`; IoError when unreadable, SchemaError when not valid JSON.
ManifoldModel load_model(const std::filesystem::path& path, double tol = kDefaultTolerance);

void save_model(const ManifoldModel& model, const std::filesystem::path& path);

/// Checks every Chart-backend sample: constraints vanish and the frame has full rank.
void validate_samples(const ManifoldModel& model, double tol = kDefaultTolerance);

}  // namespace kmu

#pragma once

#include <filesystem>
#include <iosfwd>
#include <variant>
#include <vector>

#include "handgeo/mlp.hpp"
#include "handgeo/nearest_neighbor.hpp"
#include "handgeo/rbf.hpp"

namespace handgeo {

struct NnModel {
  TemplateDb db;
  Metric metric = Metric::kMse;
  ScalerParams scaler{};
};

struct CommitteeModel {
  std::vector<MlpModel> members;
};

using Model = std::variant<NnModel, MlpModel, CommitteeModel, RbfModel>;

/// Plain text: a "handgeo-model 1" line, "key value..." header lines, then
/// sized row-major blocks. Numbers carry 17 significant digits, so reading
/// back reproduces every double exactly.
void write_model(std::ostream& os, const Model& model);
Model read_model(std::istream& is);
void save_model(const Model& model, const std::filesystem::path& path);
Model load_model(const std::filesystem::path& path);

const ScalerParams& model_scaler(const Model& model);

/// Scales raw features with the model's scaler and returns the person id.
int identify(const Model& model, const FeatureVector& raw);

}  // namespace handgeo

#pragma once

#include "sec/experiment.hpp"

#include <json.hpp>

#include <memory>
#include <string>

namespace sec {

using Json = nlohmann::json;

/// {"rows", "cols", "data"} with data in row-major order.
Json matrix_to_json(const Matrix& m);
Matrix matrix_from_json(const Json& j);

std::string hash_to_string(std::uint64_t hash);
std::uint64_t hash_from_string(const std::string& text);

void to_json(Json& j, const KernelSpec& k);
void from_json(const Json& j, KernelSpec& k);

/// The view-2 training matrix itself is not stored, only its content hash.
void to_json(Json& j, const AdaptedModel& m);
void from_json(const Json& j, AdaptedModel& m);

/// Pairs a deserialized model with its view-2 training matrix; throws
/// InputError when the content hash does not match.
void attach_view2(AdaptedModel& model, std::shared_ptr<const Matrix> X2);

void to_json(Json& j, const IntegrationSolution& s);

void to_json(Json& j, const SecurityDistances& d);
void from_json(const Json& j, SecurityDistances& d);
void to_json(Json& j, const SecurityReport& r);
void from_json(const Json& j, SecurityReport& r);

void to_json(Json& j, const TTestResult& t);
void from_json(const Json& j, TTestResult& t);
void to_json(Json& j, const Summary& s);
void from_json(const Json& j, Summary& s);
void to_json(Json& j, const MethodSummary& m);
void from_json(const Json& j, MethodSummary& m);
void to_json(Json& j, const RepetitionRecord& r);
void from_json(const Json& j, RepetitionRecord& r);
void to_json(Json& j, const ExperimentReport& r);
void from_json(const Json& j, ExperimentReport& r);
void to_json(Json& j, const ExperimentTimings& t);

void write_json_file(const std::string& path, const Json& j);
Json read_json_file(const std::string& path);

}  // namespace sec

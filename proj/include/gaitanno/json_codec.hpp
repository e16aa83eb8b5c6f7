#pragma once

// JSON encoders/decoders for the data model, shared by the file formats and
// the HTTP service. Decoders throw ParseError naming the offending field.

#include <string>
#include <vector>

#include "gaitanno/bundle_adjust.hpp"
#include "gaitanno/eval.hpp"
#include "gaitanno/io.hpp"
#include "gaitanno/longrange.hpp"
#include "gaitanno/session.hpp"
#include "json.hpp"

namespace gaitanno::io::codec {

using json = nlohmann::json;

// Location prefix for diagnostics: "line N: " in line-based files.
struct Where {
  std::size_t line = 0;
  std::string prefix(const std::string& field) const {
    std::string s = line > 0 ? "line " + std::to_string(line) + ": " : std::string();
    return s + "field '" + field + "': ";
  }
};

[[noreturn]] void parse_fail(const Where& w, const std::string& field, const std::string& msg);
const json& field(const json& j, const char* name, const Where& w = {});
double num(const json& j, const char* name, const Where& w = {});
std::int64_t integer(const json& j, const char* name, const Where& w = {});
std::string str(const json& j, const char* name, const Where& w = {});
bool boolean(const json& j, const char* name, const Where& w = {});
std::vector<double> numbers(const json& v, const char* name, const Where& w = {}, std::size_t expected = 0);
Vec3 vec3(const json& j, const char* name, const Where& w = {});
json to_json(const Vec3& v);

json header(const std::string& format);
void check_header(const json& j, const std::string& format, const Where& w, const WarningSink& warn);

json intrinsics_json(const CameraIntrinsics& k);
CameraIntrinsics intrinsics_from(const json& j, const Where& w = {});
json pose_json(const CameraPose& p);
CameraPose pose_from(const json& j, const Where& w = {});
json schema_json(const JointSchema& s);
JointSchema schema_from(const json& j, const Where& w = {});
json nudge_json(const NudgeState& s);
NudgeState nudge_from(const json& j, const Where& w = {});
json summary_json(const ErrorSummary& s);
ErrorSummary summary_from(const json& j, const Where& w = {});
json count_json(const ContainmentCount& c);
ContainmentCount count_from(const json& j, const Where& w = {});
json label_json(const BoxLabel& l);
BoxLabel label_from(const json& j, const Where& w = {});

json ba_report_json(const BAReport& r);
BAReport ba_report_from(const json& j, const Where& w = {});
json error_report_json(const ErrorReport& r);
ErrorReport error_report_from(const json& j, const Where& w = {});
json containment_json(const ContainmentResult& r);
ContainmentResult containment_from(const json& j, const Where& w = {});

}  // namespace gaitanno::io::codec

#ifndef RMD_PLANNER_HPP_
#define RMD_PLANNER_HPP_

#include <array>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "rmd/plan.hpp"
#include "rmd/scene.hpp"

namespace rmd {

inline constexpr std::array<std::string_view, 6> kPromptSections = {
    "scene_context", "rmd_definition", "plan_instance", "idea_outline", "plan_rules",
    "reference_example"};

class PlannerError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class FixtureMissingError : public PlannerError {
 public:
  explicit FixtureMissingError(std::string key)
      : PlannerError("no recorded planner reply for key " + key), key_(std::move(key)) {}
  const std::string& key() const { return key_; }

 private:
  std::string key_;
};

class TransportError : public PlannerError {
 public:
  using PlannerError::PlannerError;
};

using PromptTemplates = std::map<std::string, std::string>;

inline std::string read_text_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline void write_text_file(const std::filesystem::path& path, std::string_view text) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << text;
}

//! Loads `<dir>/<section>.txt` for every section that exists.
inline PromptTemplates load_templates(const std::filesystem::path& dir) {
  PromptTemplates t;
  for (auto name : kPromptSections) {
    const auto path = dir / (std::string(name) + ".txt");
    if (std::filesystem::exists(path)) t.emplace(std::string(name), read_text_file(path));
  }
  return t;
}

struct PromptBundle {
  std::vector<std::pair<std::string, std::string>> sections;
  std::string instruction;
  std::string image_ref;

  //! Sections joined under "## name" headers; this is the request body text.
  std::string render() const {
    std::string out;
    for (const auto& [name, text] : sections) {
      out += "## " + name + "\n" + text;
      if (text.empty() || text.back() != '\n') out += '\n';
      out += '\n';
    }
    return out;
  }
};

namespace detail {

inline void replace_all(std::string& s, std::string_view from, std::string_view to) {
  for (std::size_t pos = s.find(from); pos != std::string::npos; pos = s.find(from, pos + to.size()))
    s.replace(pos, from.size(), to);
}

inline std::string fmt_num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  return buf;
}

}  // namespace detail

//! Text listing of objects, their parts and box sizes, plus the relation vocabulary.
//! Waypoints are listed by name only.
inline std::string describe_scene(const Scene& scene) {
  std::string out = "scene_id: " + scene.scene_id + "\nobjects:\n";
  for (const auto& obj : scene.objects) {
    if (obj.waypoint) {
      out += "- " + obj.name + " (waypoint)\n";
      continue;
    }
    const Vec3 s = obj.aabb.size();
    out += "- " + obj.name + (obj.movable ? " (movable)" : " (static)") + " size " +
           detail::fmt_num(s.x()) + " x " + detail::fmt_num(s.y()) + " x " + detail::fmt_num(s.z()) +
           " m";
    if (!obj.parts.empty()) {
      out += ", parts:";
      for (std::size_t i = 0; i < obj.parts.size(); ++i)
        out += (i ? ", " : " ") + obj.parts[i].name;
    }
    out += "\n";
  }
  out += "relations:";
  for (int r = 0; r <= int(Relation::Down); ++r) out += " " + std::string(to_token(Relation(r)));
  out += "\nhuman parts:";
  for (int b = 0; b < kNumBodies; ++b) out += " " + std::string(body_name(Body(b)));
  out += "\n";
  return out;
}

/*
 * Fills the six section templates. Placeholders: {{instruction}}, {{scene}}
 * and {{image}}. Throws naming the first missing or empty section.
 */
inline PromptBundle build_prompt(const std::string& instruction, const Scene& scene,
                                 const PromptTemplates& templates, const std::string& image_ref = "") {
  PromptBundle bundle;
  bundle.instruction = instruction;
  bundle.image_ref = image_ref;
  const std::string scene_text = describe_scene(scene);
  for (auto name : kPromptSections) {
    const auto it = templates.find(std::string(name));
    if (it == templates.end() || it->second.empty())
      throw PlannerError("missing prompt template section: " + std::string(name));
    std::string text = it->second;
    detail::replace_all(text, "{{instruction}}", instruction);
    detail::replace_all(text, "{{scene}}", scene_text);
    detail::replace_all(text, "{{image}}", image_ref.empty() ? "(none)" : image_ref);
    bundle.sections.emplace_back(std::string(name), std::move(text));
  }
  return bundle;
}

inline std::uint64_t fnv1a64(std::string_view s) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

inline std::string fixture_key(const std::string& scene_id, const std::string& instruction) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(fnv1a64(instruction)));
  return scene_id + "_" + buf;
}

enum class Provenance { Fixture, Live };

inline std::string_view to_token(Provenance p) { return p == Provenance::Fixture ? "fixture" : "live"; }

struct PlannerResponse {
  std::string raw_text;
  std::optional<Plan> plan;
  std::optional<std::string> parse_error;
  Provenance provenance = Provenance::Fixture;
};

//! Sends the rendered prompt (and image path, possibly empty) and returns the raw reply.
using PlannerTransport = std::function<std::string(const std::string& prompt, const std::string& image_ref)>;

//! Drops a surrounding ``` / ```json fence if the reply is wrapped in one.
inline std::string strip_code_fence(const std::string& text) {
  const auto open = text.find("```");
  if (open == std::string::npos) return text;
  const auto body = text.find('\n', open);
  const auto close = text.rfind("```");
  if (body == std::string::npos || close <= body) return text;
  return text.substr(body + 1, close - body - 1);
}

inline PlannerResponse parse_reply(std::string raw, Provenance provenance) {
  PlannerResponse r;
  r.raw_text = std::move(raw);
  r.provenance = provenance;
  try {
    r.plan = parse_plan(strip_code_fence(r.raw_text));
  } catch (const PlanError& e) {
    r.parse_error = e.what();
  }
  return r;
}

/*
 * Fixture mode (no transport): replays `<store>/<key>.response.txt`.
 * Live mode: calls the transport, records request and reply into the store,
 * then parses the recorded reply.
 */
inline PlannerResponse request_plan(const PromptBundle& bundle, const std::string& scene_id,
                                    const std::filesystem::path& store,
                                    const PlannerTransport& transport = nullptr) {
  const std::string key = fixture_key(scene_id, bundle.instruction);
  const auto response_path = store / (key + ".response.txt");
  if (!transport) {
    if (!std::filesystem::exists(response_path)) throw FixtureMissingError(key);
    return parse_reply(read_text_file(response_path), Provenance::Fixture);
  }
  const std::string prompt = bundle.render();
  std::string reply = transport(prompt, bundle.image_ref);
  write_text_file(store / (key + ".request.txt"), prompt);
  write_text_file(response_path, reply);
  return parse_reply(std::move(reply), Provenance::Live);
}

}  // namespace rmd

#endif  // RMD_PLANNER_HPP_

#pragma once

#include <nlohmann/json.hpp>

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "hnmsing/error.hpp"
#include "hnmsing/segmentation.hpp"

namespace hnmsing::detail {

using nlohmann::json;

[[noreturn]] inline void schema_error(const std::string& pointer, const std::string& what) {
  throw Error(ErrorKind::SchemaViolation, (pointer.empty() ? "/" : pointer) + ": " + what);
}

// Typed accessors that report the JSON pointer of the offending field.
class Node {
 public:
  Node(const json& j, std::string pointer) : j_(j), ptr_(std::move(pointer)) {}

  const json& raw() const noexcept { return j_; }
  const std::string& pointer() const noexcept { return ptr_; }

  bool has(const char* key) const { return j_.is_object() && j_.contains(key); }

  Node at(const char* key) const {
    if (!j_.is_object()) schema_error(ptr_, "expected object");
    const auto it = j_.find(key);
    if (it == j_.end()) schema_error(ptr_ + "/" + key, "missing field");
    return Node(*it, ptr_ + "/" + key);
  }

  Node at(std::size_t i) const { return Node(j_.at(i), ptr_ + "/" + std::to_string(i)); }

  std::size_t array_size() const {
    if (!j_.is_array()) schema_error(ptr_, "expected array");
    return j_.size();
  }

  double number() const {
    if (!j_.is_number()) schema_error(ptr_, "expected number");
    return j_.get<double>();
  }

  double non_negative() const {
    const double v = number();
    if (!(v >= 0.0)) schema_error(ptr_, "expected a non-negative number");
    return v;
  }

  std::int64_t integer() const {
    if (!j_.is_number_integer()) schema_error(ptr_, "expected integer");
    return j_.get<std::int64_t>();
  }

  bool boolean() const {
    if (!j_.is_boolean()) schema_error(ptr_, "expected boolean");
    return j_.get<bool>();
  }

  std::string string() const {
    if (!j_.is_string()) schema_error(ptr_, "expected string");
    return j_.get<std::string>();
  }

  Span span() const {
    if (array_size() != 2) schema_error(ptr_, "expected [begin, end]");
    const Span s{at(std::size_t{0}).integer(), at(std::size_t{1}).integer()};
    if (s.begin < 0 || s.end < s.begin) schema_error(ptr_, "invalid span");
    return s;
  }

 private:
  const json& j_;
  std::string ptr_;
};

inline json span_json(const Span& s) { return json::array({s.begin, s.end}); }

inline json segments_json(const SyllableSegmentation& seg) {
  json j = json::object();
  if (seg.cx) j["cx"] = span_json(*seg.cx);
  j["a"] = span_json(seg.a);
  j["s"] = span_json(seg.s);
  j["r"] = span_json(seg.r);
  if (seg.cn) j["cn"] = span_json(*seg.cn);
  return j;
}

inline SyllableSegmentation segments_from(const Node& n) {
  SyllableSegmentation seg;
  if (n.has("cx")) seg.cx = n.at("cx").span();
  seg.a = n.at("a").span();
  seg.s = n.at("s").span();
  seg.r = n.at("r").span();
  if (n.has("cn")) seg.cn = n.at("cn").span();
  if (!seg.contiguous()) schema_error(n.pointer(), "segments must be contiguous and ordered");
  return seg;
}

inline json parse_json(std::string_view text) {
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    schema_error("", std::string("not valid JSON: ") + e.what());
  }
}

}  // namespace hnmsing::detail

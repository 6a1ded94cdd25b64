// SPDX-License-Identifier: Apache-2.0
#include "json_strict.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <optional>
#include <vector>

namespace tracesim::detail {
namespace {

std::string location(std::string_view text, std::size_t byte) {
  byte = std::min(byte, text.size());
  std::size_t line = 1;
  std::size_t col = 1;
  for (std::size_t i = 0; i < byte; ++i) {
    if (text[i] == '\n') {
      ++line;
      col = 1;
    } else {
      ++col;
    }
  }
  return "line " + std::to_string(line) + ", column " + std::to_string(col);
}

// Byte offset of the opening quote of the n-th (0-based) object key.
std::size_t key_offset(std::string_view text, std::size_t n) {
  std::size_t i = 0;
  while (i < text.size()) {
    if (text[i] != '"') {
      ++i;
      continue;
    }
    const std::size_t open = i++;
    while (i < text.size() && text[i] != '"') i += text[i] == '\\' ? 2 : 1;
    ++i;
    std::size_t j = i;
    while (j < text.size() && (text[j] == ' ' || text[j] == '\t' || text[j] == '\n' || text[j] == '\r')) ++j;
    if (j < text.size() && text[j] == ':') {
      if (n == 0) return open;
      --n;
    }
  }
  return text.size();
}

class StrictBuilder {
 public:
  using number_integer_t = Json::number_integer_t;
  using number_unsigned_t = Json::number_unsigned_t;
  using number_float_t = Json::number_float_t;
  using string_t = Json::string_t;
  using binary_t = Json::binary_t;

  StrictBuilder(std::string_view streamed_field, const ElementSink& sink)
      : streamed_field_(streamed_field), sink_(sink) {}

  bool null() { return put(Json(nullptr)); }
  bool boolean(bool v) { return put(Json(v)); }
  bool number_integer(number_integer_t v) { return put(Json(v)); }
  bool number_unsigned(number_unsigned_t v) { return put(Json(v)); }
  bool number_float(number_float_t v, const string_t&) { return put(Json(v)); }
  bool string(string_t& v) { return put(Json(std::move(v))); }
  bool binary(binary_t&) {
    error_ = "binary values are not supported";
    return false;
  }

  bool start_object(std::size_t) {
    if (!stack_.empty() && stack_.back().kind == Kind::Streamed) {
      element_keys_.clear();
      stack_.push_back(Frame{nullptr, {}, Kind::Element});
      return true;
    }
    Json* slot = open(Json::object());
    stack_.push_back(Frame{slot, {}, Kind::Dom});
    return true;
  }

  bool key(string_t& k) {
    Frame& top = stack_.back();
    const bool duplicate = top.kind == Kind::Element
                               ? std::find(element_keys_.begin(), element_keys_.end(), k) != element_keys_.end()
                               : top.node->contains(k);
    if (duplicate) {
      error_ = "duplicate field \"" + k + "\"";
      duplicate_key_ = keys_seen_;
      return false;
    }
    ++keys_seen_;
    if (top.kind == Kind::Element) element_keys_.push_back(k);
    top.pending_key = std::move(k);
    return true;
  }

  bool end_object() {
    close();
    return true;
  }

  bool start_array(std::size_t) {
    if (stack_.size() == 1 && !streamed_field_.empty() && stack_.back().node->is_object() &&
        stack_.back().pending_key == streamed_field_) {
      Json* slot = open(Json::array());
      stack_.push_back(Frame{slot, {}, Kind::Streamed});
      return true;
    }
    Json* slot = open(Json::array());
    stack_.push_back(Frame{slot, {}, Kind::Dom});
    return true;
  }

  bool end_array() {
    close();
    return true;
  }

  bool parse_error(std::size_t position, const std::string&, const nlohmann::detail::exception& ex) {
    error_position_ = position;
    if (error_.empty()) error_ = ex.what();
    return false;
  }

  Json& result() { return root_; }
  const std::string& error() const { return error_; }
  std::size_t error_position() const { return error_position_; }
  std::optional<std::size_t> duplicate_key() const { return duplicate_key_; }

 private:
  // Dom: an object or array being built. Streamed: the streamed array
  // itself. Element: an object element of the streamed array.
  enum class Kind { Dom, Streamed, Element };

  struct Frame {
    Json* node;
    std::string pending_key;
    Kind kind;
  };

  // Storage for a new container value; the caller pushes its frame.
  Json* open(Json value) {
    if (stack_.empty()) {
      root_ = std::move(value);
      return &root_;
    }
    Frame& top = stack_.back();
    switch (top.kind) {
      case Kind::Streamed:
        element_ = std::move(value);
        return &element_;
      case Kind::Element:
        member_ = std::move(value);
        return &member_;
      case Kind::Dom:
        break;
    }
    if (top.node->is_object()) {
      Json& slot = (*top.node)[top.pending_key];
      slot = std::move(value);
      return &slot;
    }
    top.node->push_back(std::move(value));
    return &top.node->back();
  }

  bool put(Json value) {
    if (stack_.empty()) {
      root_ = std::move(value);
      return true;
    }
    Frame& top = stack_.back();
    switch (top.kind) {
      case Kind::Streamed:
        if (sink_.end) sink_.end(streamed_count_, &value);
        ++streamed_count_;
        return true;
      case Kind::Element:
        if (sink_.member) sink_.member(streamed_count_, top.pending_key, std::move(value));
        return true;
      case Kind::Dom:
        break;
    }
    if (top.node->is_object()) {
      (*top.node)[top.pending_key] = std::move(value);
    } else {
      top.node->push_back(std::move(value));
    }
    return true;
  }

  void close() {
    const Kind closed = stack_.back().kind;
    stack_.pop_back();
    if (stack_.empty()) return;
    Frame& top = stack_.back();
    if (top.kind == Kind::Streamed) {
      if (sink_.end) sink_.end(streamed_count_, closed == Kind::Element ? nullptr : &element_);
      element_ = Json();
      ++streamed_count_;
    } else if (top.kind == Kind::Element) {
      if (sink_.member) sink_.member(streamed_count_, top.pending_key, std::move(member_));
      member_ = Json();
    }
  }

  std::string_view streamed_field_;
  const ElementSink& sink_;
  Json root_;
  Json element_;
  Json member_;
  std::vector<Frame> stack_;
  std::vector<std::string> element_keys_;
  std::size_t streamed_count_ = 0;
  std::string error_;
  std::size_t error_position_ = 0;
  std::size_t keys_seen_ = 0;
  std::optional<std::size_t> duplicate_key_;
};

std::string type_error(const std::string& path, const char* expected) {
  return path + ": expected " + expected;
}

}  // namespace

Json parse_strict(std::string_view text, std::string_view what, std::string_view streamed_field,
                  const ElementSink& sink) {
  StrictBuilder builder(streamed_field, sink);
  bool ok = false;
  try {
    ok = Json::sax_parse(text.begin(), text.end(), &builder, Json::input_format_t::json, true);
  } catch (const Error&) {
    throw;
  } catch (const nlohmann::json::exception& ex) {
    fail(ErrorKind::SyntaxError, std::string(what) + ": " + ex.what());
  }
  if (!ok) {
    std::string where;
    if (builder.duplicate_key()) {
      where = " at " + location(text, key_offset(text, *builder.duplicate_key()));
    } else if (builder.error_position() != 0) {
      where = " at " + location(text, builder.error_position() - 1);
    }
    fail(ErrorKind::SyntaxError, std::string(what) + where + ": " + builder.error());
  }
  return std::move(builder.result());
}

const Json& require(const Json& obj, std::string_view key, const std::string& path) {
  auto it = obj.find(key);
  if (it == obj.end()) fail(ErrorKind::SyntaxError, path + ": missing field \"" + std::string(key) + "\"");
  return *it;
}

const Json* optional(const Json& obj, std::string_view key) {
  auto it = obj.find(key);
  return it == obj.end() ? nullptr : &*it;
}

void expect_object(const Json& value, const std::string& path) {
  if (!value.is_object()) fail(ErrorKind::SyntaxError, type_error(path, "an object"));
}

void reject_unknown(const Json& obj, std::initializer_list<std::string_view> known,
                    const std::string& path) {
  for (const auto& [key, value] : obj.items()) {
    if (std::find(known.begin(), known.end(), key) == known.end()) {
      fail(ErrorKind::SyntaxError, path + ": unknown field \"" + key + "\"");
    }
  }
}

std::uint64_t as_u64(const Json& value, const std::string& path) {
  if (value.is_number_unsigned()) return value.get<std::uint64_t>();
  if (value.is_number_integer()) {
    auto v = value.get<std::int64_t>();
    if (v >= 0) return static_cast<std::uint64_t>(v);
  }
  fail(ErrorKind::SyntaxError, type_error(path, "a non-negative integer"));
}

std::int64_t as_i64(const Json& value, const std::string& path) {
  if (value.is_number_integer() && !value.is_number_unsigned()) return value.get<std::int64_t>();
  if (value.is_number_unsigned() &&
      value.get<std::uint64_t>() <= static_cast<std::uint64_t>(INT64_MAX)) {
    return static_cast<std::int64_t>(value.get<std::uint64_t>());
  }
  fail(ErrorKind::SyntaxError, type_error(path, "an integer"));
}

double as_double(const Json& value, const std::string& path) {
  if (!value.is_number()) fail(ErrorKind::SyntaxError, type_error(path, "a number"));
  return value.get<double>();
}

std::string as_string(const Json& value, const std::string& path) {
  if (!value.is_string()) fail(ErrorKind::SyntaxError, type_error(path, "a string"));
  return value.get<std::string>();
}

void append_quoted(std::string& out, std::string_view s) {
  out.push_back('"');
  for (char c : s) {
    switch (c) {
      case '"': out += "\\\""; break;
      case '\\': out += "\\\\"; break;
      case '\n': out += "\\n"; break;
      case '\r': out += "\\r"; break;
      case '\t': out += "\\t"; break;
      case '\b': out += "\\b"; break;
      case '\f': out += "\\f"; break;
      default:
        if (static_cast<unsigned char>(c) < 0x20) {
          char buf[8];
          std::snprintf(buf, sizeof buf, "\\u%04x", static_cast<unsigned>(c));
          out += buf;
        } else {
          out.push_back(c);
        }
    }
  }
  out.push_back('"');
}

}  // namespace tracesim::detail

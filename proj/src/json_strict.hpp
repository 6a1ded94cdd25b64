// SPDX-License-Identifier: Apache-2.0
//
// Strict JSON reading shared by the file-format parsers. nlohmann's default
// DOM parser silently keeps the last of duplicated keys; the formats here
// treat that as a syntax error, so documents are built through a SAX handler.
#pragma once

#include <cstdint>
#include <functional>
#include <initializer_list>
#include <string>
#include <string_view>

#include <json.hpp>

#include "tracesim/error.hpp"

namespace tracesim::detail {

using Json = nlohmann::json;

/// Receives the elements of a streamed array without building them as DOM
/// objects. Object elements arrive member by member, then `end` is called
/// with a null pointer; any other element arrives whole through `end`.
struct ElementSink {
  std::function<void(std::size_t index, const std::string& key, Json&& value)> member;
  std::function<void(std::size_t index, const Json* non_object)> end;
};

/// Parses `text` into a DOM, rejecting duplicate object keys. When
/// `streamed_field` is non-empty, elements of that top-level array are handed
/// to `sink` as they are read and the array is left empty in the result.
Json parse_strict(std::string_view text, std::string_view what,
                  std::string_view streamed_field = {}, const ElementSink& sink = {});

/// Path-aware field access; all failures are SyntaxError naming `path`.
const Json& require(const Json& obj, std::string_view key, const std::string& path);
const Json* optional(const Json& obj, std::string_view key);
void expect_object(const Json& value, const std::string& path);
void reject_unknown(const Json& obj, std::initializer_list<std::string_view> known,
                    const std::string& path);

std::uint64_t as_u64(const Json& value, const std::string& path);
std::int64_t as_i64(const Json& value, const std::string& path);
double as_double(const Json& value, const std::string& path);
std::string as_string(const Json& value, const std::string& path);

/// Appends `s` as a quoted JSON string literal.
void append_quoted(std::string& out, std::string_view s);

}  // namespace tracesim::detail

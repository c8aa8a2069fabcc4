#include "surgkit/types.hpp"

#include <cctype>
#include <charconv>
#include <unordered_set>

#include "surgkit/error.hpp"

namespace surgkit {

std::string normalize_class_name(std::string_view name) {
  std::string out;
  out.reserve(name.size());
  bool pending_space = false;
  for (char c : name) {
    if (std::isspace(static_cast<unsigned char>(c))) {
      pending_space = !out.empty();
      continue;
    }
    if (pending_space) {
      out.push_back(' ');
      pending_space = false;
    }
    out.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
  }
  return out;
}

ClassCatalog::ClassCatalog(std::vector<std::string> names)
    : names_(std::move(names)) {
  std::unordered_set<std::string> seen;
  for (const auto& name : names_) {
    std::string norm = normalize_class_name(name);
    if (norm.empty()) {
      throw ValidationError("class catalog: empty class name");
    }
    if (!seen.insert(norm).second) {
      throw ValidationError("class catalog: duplicate class name '" + name + "'");
    }
  }
}

const std::string& ClassCatalog::name_of(int id) const {
  if (!contains(id)) {
    throw ValidationError("class catalog: unknown class id " + std::to_string(id));
  }
  return names_[static_cast<std::size_t>(id)];
}

std::optional<int> ClassCatalog::find(std::string_view name) const {
  const std::string norm = normalize_class_name(name);
  for (std::size_t i = 0; i < names_.size(); ++i) {
    if (normalize_class_name(names_[i]) == norm) {
      return static_cast<int>(i);
    }
  }
  return std::nullopt;
}

ClassCatalog endoscope_catalog() {
  return ClassCatalog({
      "crocodile grasper",
      "johan grasper",
      "hook diathermy",
      "maryland grasper",
      "clipper",
      "scissors",
      "bag holder",
      "trocar",
  });
}

ClassEntry resolve_class(const ClassCatalog& catalog, std::string_view name) {
  if (catalog.empty()) {
    throw ValidationError("resolve_class: empty catalog");
  }
  auto id = catalog.find(name);
  if (!id) {
    throw ValidationError("resolve_class: unknown class name '" +
                          std::string(name) + "'");
  }
  return {*id, catalog.name_of(*id)};
}

ClassEntry resolve_class(const ClassCatalog& catalog, int id) {
  if (catalog.empty()) {
    throw ValidationError("resolve_class: empty catalog");
  }
  return {id, catalog.name_of(id)};  // name_of throws on unknown id
}

ClassEntry resolve_class_token(const ClassCatalog& catalog,
                               std::string_view name_or_id) {
  const std::string norm = normalize_class_name(name_or_id);
  int id = 0;
  const char* first = norm.data();
  const char* last = norm.data() + norm.size();
  auto [ptr, ec] = std::from_chars(first, last, id);
  if (ec == std::errc() && ptr == last && !norm.empty()) {
    return resolve_class(catalog, id);
  }
  return resolve_class(catalog, name_or_id);
}

void validate_dataset(const Dataset& dataset) {
  std::unordered_set<std::string> ids;
  for (const auto& frame : dataset.frames) {
    if (!ids.insert(frame.id).second) {
      throw ValidationError("dataset: duplicate frame id '" + frame.id + "'");
    }
    if (frame.image_width < 0 || frame.image_height < 0) {
      throw ValidationError("dataset: frame '" + frame.id +
                            "' has negative image dimensions");
    }
    for (const auto& ann : frame.annotations) {
      if (!dataset.catalog.contains(ann.class_id)) {
        throw ValidationError("dataset: frame '" + frame.id +
                              "' references unknown class id " +
                              std::to_string(ann.class_id));
      }
      // Only axis-aligned boxes ever get clamped or normalized against the
      // image, so only they require known dimensions.
      if (std::holds_alternative<BoxAA>(ann.geometry) &&
          (frame.image_width <= 0 || frame.image_height <= 0)) {
        throw ValidationError("dataset: frame '" + frame.id +
                              "' has axis-aligned boxes but no positive "
                              "image dimensions");
      }
    }
  }
}

}  // namespace surgkit

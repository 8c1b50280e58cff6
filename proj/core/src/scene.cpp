#include "rerankkit/scene.hpp"

#include <algorithm>
#include <cctype>
#include <stdexcept>

namespace rerankkit {

void Scene::validate() const {
  if (width < 1 || height < 1) {
    throw std::invalid_argument("scene " + id + ": non-positive dimensions");
  }
  if (seg_mask.width() != width || seg_mask.height() != height) {
    throw std::invalid_argument("scene " + id + ": seg mask dimensions differ from scene");
  }
  if (height_map.width() != width || height_map.height() != height) {
    throw std::invalid_argument("scene " + id + ": height map dimensions differ from scene");
  }
}

namespace {

std::string lowered(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return s;
}

}  // namespace

ClassMap ClassMap::defaults() {
  ClassMap m;
  m.add("road", 1);
  m.add("car", 2);
  m.add("pedestrian", 3);
  m.add("cyclist", 4);
  m.add("building", 5);
  m.add("vegetation", 6);
  m.set_road(1);
  return m;
}

void ClassMap::add(const std::string& name, ClassId id) {
  const std::string key = lowered(name);
  if (id < 0 || id > 255) {
    throw std::invalid_argument("class id out of mask range: " + std::to_string(id));
  }
  auto by_name = by_name_.find(key);
  auto by_id = by_id_.find(id);
  if (by_name != by_name_.end() && by_name->second != id) {
    throw std::invalid_argument("class '" + name + "' mapped twice");
  }
  if (by_id != by_id_.end() && by_id->second != key) {
    throw std::invalid_argument("class id " + std::to_string(id) + " mapped twice");
  }
  by_name_[key] = id;
  by_id_[id] = key;
}

std::optional<ClassId> ClassMap::id_of(const std::string& name) const {
  auto it = by_name_.find(lowered(name));
  if (it == by_name_.end()) return std::nullopt;
  return it->second;
}

std::optional<std::string> ClassMap::name_of(ClassId id) const {
  auto it = by_id_.find(id);
  if (it == by_id_.end()) return std::nullopt;
  return it->second;
}

}  // namespace rerankkit

#pragma once

#include <string>
#include <vector>

#include "adaptsel/scene.hpp"

namespace fixture {

using adaptsel::geometry::Vec3;

inline adaptsel::scene::Target sphere(std::string id, const Vec3& position, double diameter) {
  adaptsel::scene::Target t;
  t.id = std::move(id);
  t.shape = adaptsel::geometry::Shape::sphere;
  t.pose.position = position;
  t.pose.scale = Vec3::Constant(diameter);
  return t;
}

inline adaptsel::scene::Target cube(std::string id, const Vec3& position, double edge) {
  adaptsel::scene::Target t = sphere(std::move(id), position, edge);
  t.shape = adaptsel::geometry::Shape::box;
  return t;
}

inline adaptsel::scene::Scene scene_of(std::vector<adaptsel::scene::Target> targets) {
  adaptsel::scene::Scene s;
  s.targets = std::move(targets);
  return s;
}

/// Controller at the origin pointing along +z, head 0.4 m above and behind.
inline adaptsel::scene::PointerState pointer(const Vec3& direction = Vec3::UnitZ(), double t = 0.0) {
  adaptsel::scene::PointerState p;
  p.controller_position = Vec3::Zero();
  p.pointing_direction = direction.normalized();
  p.hmd_position = Vec3(-0.2, 0.4, -0.3);
  p.hmd_forward = Vec3::UnitZ();
  p.timestamp = t;
  return p;
}

inline adaptsel::scene::ContextFrame context(const adaptsel::scene::Scene& s,
                                             const adaptsel::scene::PointerState& p = pointer(),
                                             double cone_radius = 20.0) {
  return adaptsel::scene::extract_context(s, p, adaptsel::scene::ArmModel{}, cone_radius);
}

}  // namespace fixture

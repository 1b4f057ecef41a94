#include "gmc/param_store.hpp"

#include <algorithm>
#include <cmath>

#include "gmc/errors.hpp"

namespace gmc {

const Segment& ParamStore::add(std::string name, std::size_t length, int layer) {
  for (const auto& s : segments_) {
    if (s.name == name) throw ConsistencyError("duplicate segment name: " + name);
  }
  if (!segments_.empty() && layer < segments_.back().layer) {
    throw ConsistencyError("segments must be added in non-decreasing layer order");
  }
  segments_.push_back(Segment{std::move(name), values_.size(), length, layer});
  values_.resize(values_.size() + length, 0.0);
  grads_.resize(grads_.size() + length, 0.0);
  return segments_.back();
}

const Segment& ParamStore::segment(std::string_view name) const {
  for (const auto& s : segments_) {
    if (s.name == name) return s;
  }
  throw RangeError("no parameter segment named " + std::string(name));
}

int ParamStore::num_layers() const {
  return segments_.empty() ? 0 : segments_.back().layer + 1;
}

Segment ParamStore::layer_range(int layer) const {
  Segment out{"layer" + std::to_string(layer), 0, 0, layer};
  bool found = false;
  for (const auto& s : segments_) {
    if (s.layer != layer) continue;
    if (!found) {
      out.offset = s.offset;
      found = true;
    }
    out.length = s.end() - out.offset;
  }
  if (!found) throw RangeError("no segments for layer " + std::to_string(layer));
  return out;
}

void ParamStore::zero_grads() { std::fill(grads_.begin(), grads_.end(), 0.0); }

void ParamStore::scale_grads(double factor) {
  for (double& g : grads_) g *= factor;
}

double ParamStore::grad_norm() const {
  double sq = 0.0;
  for (double g : grads_) sq += g * g;
  return std::sqrt(sq);
}

double clip_grad_norm(ParamStore& params, double max_norm) {
  const double norm = params.grad_norm();
  if (norm > max_norm) params.scale_grads(max_norm / (norm + 1e-6));
  return norm;
}

}  // namespace gmc

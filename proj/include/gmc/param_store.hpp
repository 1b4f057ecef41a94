#ifndef GMC_PARAM_STORE_HPP_
#define GMC_PARAM_STORE_HPP_

#include <cstddef>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "gmc/tensor.hpp"

namespace gmc {

struct Segment {
  std::string name;
  std::size_t offset = 0;
  std::size_t length = 0;
  int layer = 0;

  std::size_t end() const { return offset + length; }
};

// Flat parameter and gradient storage with named, contiguous segments.
// Segments are appended in order, so they tile [0, size()) without gaps.
class ParamStore {
 public:
  // Appends a zero-initialized segment and returns it.
  const Segment& add(std::string name, std::size_t length, int layer);

  const Segment& segment(std::string_view name) const;
  const std::vector<Segment>& segments() const { return segments_; }

  std::size_t size() const { return values_.size(); }
  int num_layers() const;

  // Contiguous range covering every segment of `layer`.
  Segment layer_range(int layer) const;
  Segment last_layer() const { return layer_range(num_layers() - 1); }

  std::span<double> values() { return values_; }
  std::span<const double> values() const { return values_; }
  std::span<double> grads() { return grads_; }
  std::span<const double> grads() const { return grads_; }

  std::span<double> values(const Segment& s) { return values().subspan(s.offset, s.length); }
  std::span<const double> values(const Segment& s) const {
    return values().subspan(s.offset, s.length);
  }
  std::span<double> grads(const Segment& s) { return grads().subspan(s.offset, s.length); }
  std::span<const double> grads(const Segment& s) const {
    return grads().subspan(s.offset, s.length);
  }

  void zero_grads();
  void scale_grads(double factor);
  double grad_norm() const;

 private:
  std::vector<Segment> segments_;
  AlignedBuffer values_;
  AlignedBuffer grads_;
};

// Rescales grads so their L2 norm is at most max_norm. Returns the norm
// measured before clipping.
double clip_grad_norm(ParamStore& params, double max_norm);

}  // namespace gmc

#endif  // GMC_PARAM_STORE_HPP_

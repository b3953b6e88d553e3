#pragma once

#include <cstddef>
#include <span>
#include <stdexcept>
#include <vector>

namespace ajc {

/// Flat layout of space-time cells: time block outer, state inner,
/// flat(i, k) = k * N + i.
class SpaceTimeIndexer {
 public:
  SpaceTimeIndexer() = default;
  SpaceTimeIndexer(std::size_t states, std::size_t blocks) : states_(states), blocks_(blocks) {}

  std::size_t states() const { return states_; }
  std::size_t blocks() const { return blocks_; }
  std::size_t size() const { return states_ * blocks_; }

  std::size_t flat(std::size_t state, std::size_t block) const { return block * states_ + state; }
  std::size_t state(std::size_t flat) const { return flat % states_; }
  std::size_t block(std::size_t flat) const { return flat / states_; }

  bool operator==(const SpaceTimeIndexer&) const = default;

 private:
  std::size_t states_ = 0;
  std::size_t blocks_ = 0;
};

enum class VectorKind { density, observable };

/// Values on all space-time cells. Densities carry the probability mass of
/// each cell; observables carry a value per cell.
struct SpaceTimeVector {
  SpaceTimeIndexer indexer;
  VectorKind kind = VectorKind::density;
  std::vector<double> values;

  SpaceTimeVector() = default;
  SpaceTimeVector(SpaceTimeIndexer idx, VectorKind k)
      : indexer(idx), kind(k), values(idx.size(), 0.0) {}
  SpaceTimeVector(SpaceTimeIndexer idx, VectorKind k, std::vector<double> v)
      : indexer(idx), kind(k), values(std::move(v)) {
    if (values.size() != indexer.size()) throw std::invalid_argument("space-time vector length mismatch");
  }

  double& at(std::size_t state, std::size_t block) { return values[indexer.flat(state, block)]; }
  double at(std::size_t state, std::size_t block) const { return values[indexer.flat(state, block)]; }

  std::span<const double> block(std::size_t k) const {
    return {values.data() + k * indexer.states(), indexer.states()};
  }
  std::span<double> block(std::size_t k) { return {values.data() + k * indexer.states(), indexer.states()}; }
};

/// Density or observable on the state space alone.
struct SpatialVector {
  std::vector<double> values;

  SpatialVector() = default;
  explicit SpatialVector(std::size_t n, double fill = 0.0) : values(n, fill) {}
  explicit SpatialVector(std::vector<double> v) : values(std::move(v)) {}

  std::size_t size() const { return values.size(); }
  double operator[](std::size_t i) const { return values[i]; }
  double& operator[](std::size_t i) { return values[i]; }

  static SpatialVector unit(std::size_t n, std::size_t i) {
    SpatialVector v(n);
    v[i] = 1.0;
    return v;
  }
};

}  // namespace ajc

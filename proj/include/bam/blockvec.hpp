#pragma once

#include <Eigen/Core>
#include <cstddef>
#include <memory>
#include <string>
#include <vector>

namespace bam {

using Vector = Eigen::VectorXd;

/// Ordered block ids and lengths. Shared between every vector built on it.
class BlockStructure {
 public:
  BlockStructure(std::vector<std::string> ids, std::vector<Eigen::Index> dims);

  std::size_t num_blocks() const { return ids_.size(); }
  const std::string& id(std::size_t i) const { return ids_.at(i); }
  Eigen::Index dim(std::size_t i) const { return dims_.at(i); }
  Eigen::Index total_dim() const { return total_dim_; }
  const std::vector<Eigen::Index>& dims() const { return dims_; }

  bool operator==(const BlockStructure& other) const {
    return ids_ == other.ids_ && dims_ == other.dims_;
  }

 private:
  std::vector<std::string> ids_;
  std::vector<Eigen::Index> dims_;
  Eigen::Index total_dim_ = 0;
};

/// Dense real vector partitioned into named blocks. Immutable; every update
/// produces a new value sharing the same structure.
class BlockVector {
 public:
  BlockVector(std::shared_ptr<const BlockStructure> structure,
              std::vector<Vector> blocks);
  BlockVector(std::vector<std::string> ids, std::vector<Vector> blocks);

  static BlockVector zeros(std::shared_ptr<const BlockStructure> structure);
  /// Splits a flat array according to `structure`.
  static BlockVector from_flat(std::shared_ptr<const BlockStructure> structure,
                               const Vector& flat);

  std::size_t num_blocks() const { return blocks_.size(); }
  const Vector& block(std::size_t i) const { return blocks_.at(i); }
  const std::string& id(std::size_t i) const { return structure_->id(i); }
  Eigen::Index total_dim() const { return structure_->total_dim(); }
  const BlockStructure& structure() const { return *structure_; }
  const std::shared_ptr<const BlockStructure>& structure_ptr() const {
    return structure_;
  }

  bool same_structure(const BlockVector& other) const;

  /// Copy with block `i` replaced.
  BlockVector with_block(std::size_t i, Vector value) const;

  Vector flatten() const;

 private:
  std::shared_ptr<const BlockStructure> structure_;
  std::vector<Vector> blocks_;
};

double norm_sq(const BlockVector& v);
double norm(const BlockVector& v);

/// a*u + b*v, blockwise.
BlockVector combine(double a, const BlockVector& u, double b,
                    const BlockVector& v);

/// Throws InvalidInput if any entry is NaN or infinite.
void require_finite(const Vector& v, const std::string& what);

}  // namespace bam

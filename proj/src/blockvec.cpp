#include "bam/blockvec.hpp"

#include <cmath>
#include <set>

#include "bam/error.hpp"

namespace bam {

const char* to_string(ErrorKind kind) noexcept {
  switch (kind) {
    case ErrorKind::InvalidInput: return "invalid-input";
    case ErrorKind::Shape: return "shape";
    case ErrorKind::Parameter: return "parameter";
    case ErrorKind::Evaluation: return "evaluation";
    case ErrorKind::Configuration: return "configuration";
    case ErrorKind::Estimation: return "estimation";
    case ErrorKind::Io: return "io";
  }
  return "unknown";
}

BlockStructure::BlockStructure(std::vector<std::string> ids,
                               std::vector<Eigen::Index> dims)
    : ids_(std::move(ids)), dims_(std::move(dims)) {
  if (ids_.empty()) throw Error(ErrorKind::Shape, "block structure has no blocks");
  if (ids_.size() != dims_.size())
    throw Error(ErrorKind::Shape, "block id count does not match dimension count");
  std::set<std::string> seen;
  for (std::size_t i = 0; i < ids_.size(); ++i) {
    if (!seen.insert(ids_[i]).second)
      throw Error(ErrorKind::Shape, "duplicate block id '" + ids_[i] + "'");
    if (dims_[i] < 1)
      throw Error(ErrorKind::Shape, "block '" + ids_[i] + "' is empty");
    total_dim_ += dims_[i];
  }
}

void require_finite(const Vector& v, const std::string& what) {
  if (!v.allFinite())
    throw Error(ErrorKind::InvalidInput, what + " contains a non-finite entry");
}

namespace {

std::shared_ptr<const BlockStructure> structure_of(
    std::vector<std::string> ids, const std::vector<Vector>& blocks) {
  std::vector<Eigen::Index> dims;
  dims.reserve(blocks.size());
  for (const auto& b : blocks) dims.push_back(b.size());
  return std::make_shared<const BlockStructure>(std::move(ids), std::move(dims));
}

}  // namespace

BlockVector::BlockVector(std::shared_ptr<const BlockStructure> structure,
                         std::vector<Vector> blocks)
    : structure_(std::move(structure)), blocks_(std::move(blocks)) {
  if (!structure_) throw Error(ErrorKind::Shape, "null block structure");
  if (blocks_.size() != structure_->num_blocks())
    throw Error(ErrorKind::Shape, "block count does not match structure");
  for (std::size_t i = 0; i < blocks_.size(); ++i) {
    if (blocks_[i].size() != structure_->dim(i))
      throw Error(ErrorKind::Shape,
                  "block '" + structure_->id(i) + "' has length " +
                      std::to_string(blocks_[i].size()) + ", expected " +
                      std::to_string(structure_->dim(i)));
    require_finite(blocks_[i], "block '" + structure_->id(i) + "'");
  }
}

BlockVector::BlockVector(std::vector<std::string> ids, std::vector<Vector> blocks)
    : BlockVector(structure_of(std::move(ids), blocks), blocks) {}

BlockVector BlockVector::zeros(std::shared_ptr<const BlockStructure> structure) {
  std::vector<Vector> blocks;
  for (std::size_t i = 0; i < structure->num_blocks(); ++i)
    blocks.push_back(Vector::Zero(structure->dim(i)));
  return BlockVector(std::move(structure), std::move(blocks));
}

BlockVector BlockVector::from_flat(std::shared_ptr<const BlockStructure> structure,
                                   const Vector& flat) {
  if (flat.size() != structure->total_dim())
    throw Error(ErrorKind::Shape, "flat vector length " + std::to_string(flat.size()) +
                                      " does not match total dimension " +
                                      std::to_string(structure->total_dim()));
  std::vector<Vector> blocks;
  Eigen::Index offset = 0;
  for (std::size_t i = 0; i < structure->num_blocks(); ++i) {
    blocks.push_back(flat.segment(offset, structure->dim(i)));
    offset += structure->dim(i);
  }
  return BlockVector(std::move(structure), std::move(blocks));
}

bool BlockVector::same_structure(const BlockVector& other) const {
  return structure_ == other.structure_ || *structure_ == *other.structure_;
}

BlockVector BlockVector::with_block(std::size_t i, Vector value) const {
  if (i >= blocks_.size()) throw Error(ErrorKind::Shape, "block index out of range");
  std::vector<Vector> blocks = blocks_;
  blocks[i] = std::move(value);
  return BlockVector(structure_, std::move(blocks));
}

Vector BlockVector::flatten() const {
  Vector out(total_dim());
  Eigen::Index offset = 0;
  for (const auto& b : blocks_) {
    out.segment(offset, b.size()) = b;
    offset += b.size();
  }
  return out;
}

double norm_sq(const BlockVector& v) {
  double sum = 0.0;
  for (std::size_t i = 0; i < v.num_blocks(); ++i) sum += v.block(i).squaredNorm();
  return sum;
}

double norm(const BlockVector& v) { return std::sqrt(norm_sq(v)); }

BlockVector combine(double a, const BlockVector& u, double b, const BlockVector& v) {
  if (!u.same_structure(v))
    throw Error(ErrorKind::Shape, "combine: block structures differ");
  std::vector<Vector> blocks;
  blocks.reserve(u.num_blocks());
  for (std::size_t i = 0; i < u.num_blocks(); ++i)
    blocks.push_back(a * u.block(i) + b * v.block(i));
  return BlockVector(u.structure_ptr(), std::move(blocks));
}

}  // namespace bam

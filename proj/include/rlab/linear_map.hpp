#pragma once

// Type-erased linear maps between weighted finite measure spaces.
//
// Adjoints are always taken in the weighted inner products of the domain and
// codomain. Maps diagonal in a shared eigenbasis keep that structure under
// composition so that the composition law m1(A) m2(A) = (m1 m2)(A) is exact.

#include <memory>
#include <vector>

#include "rlab/spectral_model.hpp"

namespace rlab {

class LinearMap {
 public:
  struct Impl {
    virtual ~Impl() = default;
    virtual const FiniteMeasureSpace& domain() const = 0;
    virtual const FiniteMeasureSpace& codomain() const = 0;
    virtual CVector apply(const CVector& x) const = 0;
    virtual CVector apply_adjoint(const CVector& y) const = 0;
    virtual bool real_preserving() const = 0;
  };

  explicit LinearMap(std::shared_ptr<const Impl> impl);

  /// sum_i m_i e_i <., e_i>.
  static LinearMap spectral(std::shared_ptr<const EigenBasis> basis, CVector m);
  /// sum_{ij} M_ij e_i <., e_j>.
  static LinearMap modal(std::shared_ptr<const EigenBasis> basis, CMatrix m);
  /// Explicit matrix in the point bases.
  static LinearMap dense(CMatrix matrix, FiniteMeasureSpace domain, FiniteMeasureSpace codomain);
  static LinearMap dense(CMatrix matrix, const FiniteMeasureSpace& space);
  /// Pointwise multiplication by v.
  static LinearMap diagonal(CVector v, FiniteMeasureSpace space);

  CVector apply(const CVector& x) const;
  CVector apply_adjoint(const CVector& y) const;
  LinearMap adjoint() const;
  LinearMap scaled(Complex factor) const;

  const FiniteMeasureSpace& domain() const { return impl_->domain(); }
  const FiniteMeasureSpace& codomain() const { return impl_->codomain(); }
  Index rows() const { return codomain().size(); }
  Index cols() const { return domain().size(); }
  bool real_preserving() const { return impl_->real_preserving(); }

  /// Matrix in the point bases.
  CMatrix to_dense() const;

  /// Non-null when the map is diagonal in an eigenbasis.
  const CVector* spectral_multiplier() const;
  /// Non-null when the map is block-structured in an eigenbasis (includes spectral maps).
  const CMatrix* modal_matrix() const;
  std::shared_ptr<const EigenBasis> basis() const;

  const Impl& impl() const { return *impl_; }

 private:
  std::shared_ptr<const Impl> impl_;
};

/// outer o inner.
LinearMap compose(const LinearMap& outer, const LinearMap& inner);
LinearMap compose(const std::vector<LinearMap>& chain);  // chain[0] o chain[1] o ...
/// a + b (materialized in point bases when not both spectral in one basis).
LinearMap add(const LinearMap& a, const LinearMap& b);

}  // namespace rlab

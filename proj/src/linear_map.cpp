#include "rlab/linear_map.hpp"

#include "rlab/error.hpp"

namespace rlab {

namespace {

bool is_real(const CVector& v) { return v.imag().cwiseAbs().maxCoeff() == 0.0; }
bool is_real(const CMatrix& m) { return m.size() == 0 || m.imag().cwiseAbs().maxCoeff() == 0.0; }

class SpectralImpl final : public LinearMap::Impl {
 public:
  SpectralImpl(std::shared_ptr<const EigenBasis> basis, CVector m)
      : basis_(std::move(basis)), m_(std::move(m)) {
    detail::require(m_.size() == basis_->rank(), "multiplier length must equal the basis rank");
    real_ = basis_->preserves_real(m_);
  }
  const FiniteMeasureSpace& domain() const override { return basis_->space(); }
  const FiniteMeasureSpace& codomain() const override { return basis_->space(); }
  CVector apply(const CVector& x) const override {
    return basis_->synthesize(m_.cwiseProduct(basis_->analyze(x)));
  }
  CVector apply_adjoint(const CVector& y) const override {
    return basis_->synthesize(m_.conjugate().cwiseProduct(basis_->analyze(y)));
  }
  bool real_preserving() const override { return real_; }

  const std::shared_ptr<const EigenBasis>& basis() const { return basis_; }
  const CVector& m() const { return m_; }

 private:
  std::shared_ptr<const EigenBasis> basis_;
  CVector m_;
  bool real_;
};

class ModalImpl final : public LinearMap::Impl {
 public:
  ModalImpl(std::shared_ptr<const EigenBasis> basis, CMatrix m) : basis_(std::move(basis)), m_(std::move(m)) {
    detail::require(m_.rows() == basis_->rank() && m_.cols() == basis_->rank(),
                    "modal matrix must be rank x rank");
    real_ = basis_->real_vectors() && is_real(m_);
  }
  const FiniteMeasureSpace& domain() const override { return basis_->space(); }
  const FiniteMeasureSpace& codomain() const override { return basis_->space(); }
  CVector apply(const CVector& x) const override { return basis_->synthesize(m_ * basis_->analyze(x)); }
  CVector apply_adjoint(const CVector& y) const override {
    return basis_->synthesize(m_.adjoint() * basis_->analyze(y));
  }
  bool real_preserving() const override { return real_; }

  const std::shared_ptr<const EigenBasis>& basis() const { return basis_; }
  const CMatrix& m() const { return m_; }

 private:
  std::shared_ptr<const EigenBasis> basis_;
  CMatrix m_;
  bool real_;
};

class DenseImpl final : public LinearMap::Impl {
 public:
  DenseImpl(CMatrix matrix, FiniteMeasureSpace domain, FiniteMeasureSpace codomain)
      : matrix_(std::move(matrix)), domain_(std::move(domain)), codomain_(std::move(codomain)) {
    detail::require(matrix_.rows() == codomain_.size() && matrix_.cols() == domain_.size(),
                    "dense map shape does not match its spaces");
    real_ = is_real(matrix_);
  }
  const FiniteMeasureSpace& domain() const override { return domain_; }
  const FiniteMeasureSpace& codomain() const override { return codomain_; }
  CVector apply(const CVector& x) const override { return matrix_ * x; }
  CVector apply_adjoint(const CVector& y) const override {
    CVector wy = codomain_.weights().cast<Complex>().cwiseProduct(y);
    CVector out = matrix_.adjoint() * wy;
    return out.cwiseQuotient(domain_.weights().cast<Complex>());
  }
  bool real_preserving() const override { return real_; }
  const CMatrix& matrix() const { return matrix_; }

 private:
  CMatrix matrix_;
  FiniteMeasureSpace domain_;
  FiniteMeasureSpace codomain_;
  bool real_;
};

class DiagonalImpl final : public LinearMap::Impl {
 public:
  DiagonalImpl(CVector v, FiniteMeasureSpace space) : v_(std::move(v)), space_(std::move(space)) {
    detail::require(v_.size() == space_.size(), "diagonal length must equal the space size");
    real_ = is_real(v_);
  }
  const FiniteMeasureSpace& domain() const override { return space_; }
  const FiniteMeasureSpace& codomain() const override { return space_; }
  CVector apply(const CVector& x) const override { return v_.cwiseProduct(x); }
  CVector apply_adjoint(const CVector& y) const override { return v_.conjugate().cwiseProduct(y); }
  bool real_preserving() const override { return real_; }

 private:
  CVector v_;
  FiniteMeasureSpace space_;
  bool real_;
};

class ComposedImpl final : public LinearMap::Impl {
 public:
  explicit ComposedImpl(std::vector<LinearMap> chain) : chain_(std::move(chain)) {
    for (std::size_t i = 0; i + 1 < chain_.size(); ++i) {
      detail::require(chain_[i].domain() == chain_[i + 1].codomain(), "composition of incompatible maps");
    }
  }
  const FiniteMeasureSpace& domain() const override { return chain_.back().domain(); }
  const FiniteMeasureSpace& codomain() const override { return chain_.front().codomain(); }
  CVector apply(const CVector& x) const override {
    CVector y = x;
    for (auto it = chain_.rbegin(); it != chain_.rend(); ++it) y = it->apply(y);
    return y;
  }
  CVector apply_adjoint(const CVector& y) const override {
    CVector x = y;
    for (const auto& m : chain_) x = m.apply_adjoint(x);
    return x;
  }
  bool real_preserving() const override {
    for (const auto& m : chain_) {
      if (!m.real_preserving()) return false;
    }
    return true;
  }

 private:
  std::vector<LinearMap> chain_;
};

class AdjointImpl final : public LinearMap::Impl {
 public:
  explicit AdjointImpl(LinearMap inner) : inner_(std::move(inner)) {}
  const FiniteMeasureSpace& domain() const override { return inner_.codomain(); }
  const FiniteMeasureSpace& codomain() const override { return inner_.domain(); }
  CVector apply(const CVector& x) const override { return inner_.apply_adjoint(x); }
  CVector apply_adjoint(const CVector& y) const override { return inner_.apply(y); }
  bool real_preserving() const override { return inner_.real_preserving(); }
  const LinearMap& inner() const { return inner_; }

 private:
  LinearMap inner_;
};

class ScaledImpl final : public LinearMap::Impl {
 public:
  ScaledImpl(LinearMap inner, Complex factor) : inner_(std::move(inner)), factor_(factor) {}
  const FiniteMeasureSpace& domain() const override { return inner_.domain(); }
  const FiniteMeasureSpace& codomain() const override { return inner_.codomain(); }
  CVector apply(const CVector& x) const override { return factor_ * inner_.apply(x); }
  CVector apply_adjoint(const CVector& y) const override { return std::conj(factor_) * inner_.apply_adjoint(y); }
  bool real_preserving() const override { return inner_.real_preserving() && factor_.imag() == 0.0; }

 private:
  LinearMap inner_;
  Complex factor_;
};

const SpectralImpl* as_spectral(const LinearMap& m) { return dynamic_cast<const SpectralImpl*>(&m.impl()); }
const ModalImpl* as_modal(const LinearMap& m) { return dynamic_cast<const ModalImpl*>(&m.impl()); }

}  // namespace

LinearMap::LinearMap(std::shared_ptr<const Impl> impl) : impl_(std::move(impl)) {
  detail::require(impl_ != nullptr, "null linear map");
}

LinearMap LinearMap::spectral(std::shared_ptr<const EigenBasis> basis, CVector m) {
  return LinearMap(std::make_shared<SpectralImpl>(std::move(basis), std::move(m)));
}

LinearMap LinearMap::modal(std::shared_ptr<const EigenBasis> basis, CMatrix m) {
  return LinearMap(std::make_shared<ModalImpl>(std::move(basis), std::move(m)));
}

LinearMap LinearMap::dense(CMatrix matrix, FiniteMeasureSpace domain, FiniteMeasureSpace codomain) {
  return LinearMap(std::make_shared<DenseImpl>(std::move(matrix), std::move(domain), std::move(codomain)));
}

LinearMap LinearMap::dense(CMatrix matrix, const FiniteMeasureSpace& space) {
  return dense(std::move(matrix), space, space);
}

LinearMap LinearMap::diagonal(CVector v, FiniteMeasureSpace space) {
  return LinearMap(std::make_shared<DiagonalImpl>(std::move(v), std::move(space)));
}

CVector LinearMap::apply(const CVector& x) const {
  detail::require(x.size() == cols(), "vector length does not match the map domain");
  return impl_->apply(x);
}

CVector LinearMap::apply_adjoint(const CVector& y) const {
  detail::require(y.size() == rows(), "vector length does not match the map codomain");
  return impl_->apply_adjoint(y);
}

LinearMap LinearMap::adjoint() const {
  if (const auto* s = as_spectral(*this)) return spectral(s->basis(), s->m().conjugate());
  if (const auto* m = as_modal(*this)) return modal(m->basis(), m->m().adjoint());
  if (const auto* a = dynamic_cast<const AdjointImpl*>(impl_.get())) return a->inner();
  return LinearMap(std::make_shared<AdjointImpl>(*this));
}

LinearMap LinearMap::scaled(Complex factor) const {
  if (const auto* s = as_spectral(*this)) return spectral(s->basis(), factor * s->m());
  if (const auto* m = as_modal(*this)) return modal(m->basis(), factor * m->m());
  return LinearMap(std::make_shared<ScaledImpl>(*this, factor));
}

CMatrix LinearMap::to_dense() const {
  if (const auto* m = modal_matrix()) {
    const auto b = basis();
    const CMatrix e = b->matrix();
    const CMatrix ehw = e.adjoint() * b->space().weights().cast<Complex>().asDiagonal();
    return e * (*m) * ehw;
  }
  if (const auto* s = spectral_multiplier()) {
    const auto b = basis();
    const CMatrix e = b->matrix();
    const CMatrix ehw = e.adjoint() * b->space().weights().cast<Complex>().asDiagonal();
    return e * s->asDiagonal() * ehw;
  }
  CMatrix out(rows(), cols());
  CVector unit = CVector::Zero(cols());
  for (Index j = 0; j < cols(); ++j) {
    unit.setZero();
    unit(j) = 1.0;
    out.col(j) = apply(unit);
  }
  return out;
}

const CVector* LinearMap::spectral_multiplier() const {
  const auto* s = as_spectral(*this);
  return s ? &s->m() : nullptr;
}

const CMatrix* LinearMap::modal_matrix() const {
  const auto* m = as_modal(*this);
  return m ? &m->m() : nullptr;
}

std::shared_ptr<const EigenBasis> LinearMap::basis() const {
  if (const auto* s = as_spectral(*this)) return s->basis();
  if (const auto* m = as_modal(*this)) return m->basis();
  return nullptr;
}

LinearMap compose(const LinearMap& outer, const LinearMap& inner) {
  const auto bo = outer.basis();
  const auto bi = inner.basis();
  if (bo && bi && bo == bi) {
    const auto* so = outer.spectral_multiplier();
    const auto* si = inner.spectral_multiplier();
    if (so && si) return LinearMap::spectral(bo, so->cwiseProduct(*si));
    const CMatrix mo = so ? CMatrix(so->asDiagonal()) : *outer.modal_matrix();
    const CMatrix mi = si ? CMatrix(si->asDiagonal()) : *inner.modal_matrix();
    return LinearMap::modal(bo, mo * mi);
  }
  return LinearMap(std::make_shared<ComposedImpl>(std::vector<LinearMap>{outer, inner}));
}

LinearMap compose(const std::vector<LinearMap>& chain) {
  detail::require(!chain.empty(), "empty composition");
  LinearMap out = chain.back();
  for (auto it = chain.rbegin() + 1; it != chain.rend(); ++it) out = compose(*it, out);
  return out;
}

LinearMap add(const LinearMap& a, const LinearMap& b) {
  detail::require(a.domain() == b.domain() && a.codomain() == b.codomain(), "sum of incompatible maps");
  const auto ba = a.basis();
  if (ba && ba == b.basis()) {
    const auto* sa = a.spectral_multiplier();
    const auto* sb = b.spectral_multiplier();
    if (sa && sb) return LinearMap::spectral(ba, *sa + *sb);
    const CMatrix ma = sa ? CMatrix(sa->asDiagonal()) : *a.modal_matrix();
    const CMatrix mb = sb ? CMatrix(sb->asDiagonal()) : *b.modal_matrix();
    return LinearMap::modal(ba, ma + mb);
  }
  return LinearMap::dense(a.to_dense() + b.to_dense(), a.domain(), a.codomain());
}

}  // namespace rlab

#include "giant_swing/mechanics_core.hpp"

#include <algorithm>
#include <cmath>

#include <fmt/format.h>

#include "giant_swing/errors.hpp"

namespace giant_swing {

namespace {

constexpr double kGradientStep = 1e-7;
constexpr double kBracketStep = 1e-6;

bool is_angle(double period) { return std::isfinite(period); }

}  // namespace

double wrap_angle(double angle) {
  double wrapped = std::remainder(angle, 2.0 * kPi);  // [-pi, pi]
  if (wrapped <= -kPi) wrapped += 2.0 * kPi;
  return wrapped;
}

void validate(const MechanicalSystem& sys) {
  const int n = sys.dof;
  const int k = sys.inputs;
  if (n <= 0 || k <= 0 || k >= n) {
    throw DomainError(fmt::format(
        "mechanical system needs 0 < k < n, got n = {}, k = {}", n, k));
  }
  if (sys.input_matrix.rows() != n || sys.input_matrix.cols() != k) {
    throw DomainError("input matrix must be n x k");
  }
  if (static_cast<int>(sys.periods.size()) != n) {
    throw DomainError("one period per coordinate is required");
  }
  if (!sys.inertia || !sys.potential || !sys.potential_gradient ||
      !sys.inertia_gradient) {
    throw DomainError("mechanical system is missing a model function");
  }
  Eigen::JacobiSVD<Matrix> svd(sys.input_matrix);
  const auto& sigma = svd.singularValues();
  if (sigma(k - 1) <= 1e-12 * std::max(1.0, sigma(0))) {
    throw DomainError("input matrix not full rank");
  }
}

MechanicalSystem make_system_with_fd_gradients(
    int dof, std::function<Matrix(const Vector&)> inertia,
    std::function<double(const Vector&)> potential, Matrix input_matrix,
    std::vector<double> periods) {
  MechanicalSystem sys;
  sys.dof = dof;
  sys.inputs = static_cast<int>(input_matrix.cols());
  sys.input_matrix = std::move(input_matrix);
  sys.periods = std::move(periods);
  sys.potential_gradient = [potential, dof](const Vector& q) {
    Vector grad(dof);
    Vector shifted = q;
    for (int i = 0; i < dof; ++i) {
      const double h = kGradientStep * std::max(1.0, std::abs(q(i)));
      shifted(i) = q(i) + h;
      const double up = potential(shifted);
      shifted(i) = q(i) - h;
      const double down = potential(shifted);
      shifted(i) = q(i);
      grad(i) = (up - down) / (2.0 * h);
    }
    return grad;
  };
  sys.inertia_gradient = [inertia, dof](const Vector& q) {
    Matrix stacked(dof * dof, dof);
    Vector shifted = q;
    for (int i = 0; i < dof; ++i) {
      const double h = kGradientStep * std::max(1.0, std::abs(q(i)));
      shifted(i) = q(i) + h;
      const Matrix up = inertia(shifted);
      shifted(i) = q(i) - h;
      const Matrix down = inertia(shifted);
      shifted(i) = q(i);
      stacked.middleRows(i * dof, dof) = (up - down) / (2.0 * h);
    }
    return stacked;
  };
  sys.inertia = std::move(inertia);
  sys.potential = std::move(potential);
  validate(sys);
  return sys;
}

Matrix inverse_inertia_gradient(const MechanicalSystem& sys, const Vector& q) {
  const int n = sys.dof;
  const Matrix inertia_inv = sys.inertia(q).inverse();
  const Matrix stacked = sys.inertia_gradient(q);
  Matrix out(n * n, n);
  for (int i = 0; i < n; ++i) {
    out.middleRows(i * n, n) =
        -inertia_inv * stacked.middleRows(i * n, n) * inertia_inv;
  }
  return out;
}

Vector wrap_configuration(const MechanicalSystem& sys, const Vector& q) {
  Vector out = q;
  for (int i = 0; i < sys.dof; ++i) {
    if (is_angle(sys.periods[i])) out(i) = wrap_angle(q(i));
  }
  return out;
}

InputNormalization normalize_input_matrix(const Matrix& input_matrix) {
  const int n = static_cast<int>(input_matrix.rows());
  const int k = static_cast<int>(input_matrix.cols());
  if (k == 0 || k > n) throw DomainError("input matrix must be n x k, k <= n");

  // One-sided (Hestenes) Jacobi: rotate column pairs of A = B V until they
  // are mutually orthogonal. Then A = U diag(sigma).
  Matrix cols = input_matrix;
  Matrix rotations = Matrix::Identity(k, k);
  constexpr int kMaxSweeps = 60;
  constexpr double kTol = 1e-15;
  for (int sweep = 0; sweep < kMaxSweeps; ++sweep) {
    bool rotated = false;
    for (int i = 0; i < k - 1; ++i) {
      for (int j = i + 1; j < k; ++j) {
        const double alpha = cols.col(i).squaredNorm();
        const double beta = cols.col(j).squaredNorm();
        const double gamma = cols.col(i).dot(cols.col(j));
        if (std::abs(gamma) <= kTol * std::sqrt(alpha * beta)) continue;
        rotated = true;
        const double zeta = (beta - alpha) / (2.0 * gamma);
        const double t = std::copysign(1.0, zeta) /
                         (std::abs(zeta) + std::sqrt(1.0 + zeta * zeta));
        const double c = 1.0 / std::sqrt(1.0 + t * t);
        const double s = c * t;
        for (Matrix* m : {&cols, &rotations}) {
          const Vector ci = m->col(i);
          const Vector cj = m->col(j);
          m->col(i) = c * ci - s * cj;
          m->col(j) = s * ci + c * cj;
        }
      }
    }
    if (!rotated) break;
  }

  Vector sigma(k);
  for (int i = 0; i < k; ++i) sigma(i) = cols.col(i).norm();
  const double largest = sigma.maxCoeff();
  if (!(largest > 0.0) || sigma.minCoeff() <= 1e-12 * largest) {
    throw DomainError("input matrix not full rank");
  }

  InputNormalization out;
  out.feedback = rotations * sigma.cwiseInverse().asDiagonal();
  out.normalized_input = input_matrix * out.feedback;
  return out;
}

FullState SimplyActuatedForm::to_simply_actuated(const FullState& x) const {
  return {basis.transpose().partialPivLu().solve(x.q), basis * x.p};
}

FullState SimplyActuatedForm::from_simply_actuated(const FullState& x) const {
  return {basis.transpose() * x.q, basis.partialPivLu().solve(x.p)};
}

SimplyActuatedForm simply_actuated_transform(const MechanicalSystem& sys,
                                             const Matrix& annihilator) {
  validate(sys);
  const int n = sys.dof;
  const int k = sys.inputs;
  const Matrix& input = sys.input_matrix;
  if (annihilator.rows() != n - k || annihilator.cols() != n) {
    throw DomainError("annihilator must be (n-k) x n");
  }
  if ((input.transpose() * input - Matrix::Identity(k, k)).cwiseAbs().maxCoeff() >
      1e-10) {
    throw DomainError(
        "input matrix is not left semi-orthogonal; normalize it first");
  }
  const double scale = std::max(1.0, annihilator.cwiseAbs().maxCoeff());
  if ((annihilator * input).cwiseAbs().maxCoeff() > 1e-10 * scale) {
    throw DomainError("not an annihilator");
  }

  Matrix basis(n, n);
  basis << annihilator, input.transpose();
  Eigen::FullPivLU<Matrix> lu(basis);
  if (!lu.isInvertible()) {
    throw DomainError("annihilator is not full rank");
  }

  SimplyActuatedForm out;
  out.basis = basis;
  const Matrix basis_t = basis.transpose();

  MechanicalSystem& t = out.system;
  t.dof = n;
  t.inputs = k;
  t.input_matrix = basis * input;
  // Clean round-off so the new input matrix is exactly [0; I_k].
  t.input_matrix = t.input_matrix.unaryExpr(
      [](double v) { return std::abs(v) < 1e-14 ? 0.0 : v; });

  // Periods survive only when the basis merely permutes (and possibly flips)
  // the coordinates.
  t.periods.assign(n, kInfinitePeriod);
  for (int i = 0; i < n; ++i) {
    int nonzero = -1;
    int count = 0;
    for (int j = 0; j < n; ++j) {
      if (std::abs(basis(i, j)) > 1e-14) {
        ++count;
        nonzero = j;
      }
    }
    if (count == 1 && std::abs(std::abs(basis(i, nonzero)) - 1.0) < 1e-14) {
      t.periods[i] = sys.periods[nonzero];
    }
  }

  t.inertia = [inertia = sys.inertia, basis, basis_t](const Vector& q) {
    return Matrix(basis * inertia(basis_t * q) * basis_t);
  };
  t.potential = [potential = sys.potential, basis_t](const Vector& q) {
    return potential(basis_t * q);
  };
  t.potential_gradient = [grad = sys.potential_gradient, basis,
                          basis_t](const Vector& q) {
    return Vector(basis * grad(basis_t * q));
  };
  t.inertia_gradient = [grad = sys.inertia_gradient, basis, basis_t,
                        n](const Vector& q) {
    const Matrix original = grad(basis_t * q);
    Matrix stacked(n * n, n);
    for (int j = 0; j < n; ++j) {
      // dq_i / dq~_j = (Bb^T)_{ij}
      Matrix partial = Matrix::Zero(n, n);
      for (int i = 0; i < n; ++i) {
        partial += basis_t(i, j) * original.middleRows(i * n, n);
      }
      stacked.middleRows(j * n, n) = basis * partial * basis_t;
    }
    return stacked;
  };
  return out;
}

Vector full_vector_field(const MechanicalSystem& sys, const FullState& x,
                         const Vector& torque) {
  const int n = sys.dof;
  if (!x.q.allFinite() || !x.p.allFinite()) {
    throw NumericError("non-finite state passed to the vector field");
  }
  const Matrix inertia_inv = sys.inertia(x.q).inverse();
  const Matrix inv_grad = inverse_inertia_gradient(sys, x.q);

  // (I_n kron p^T) picks row block i of grad_q(M^{-1}) and contracts it with
  // p^T, so component i of the product with p is p^T d(M^{-1})/dq_i p.
  Vector quadratic(n);
  for (int i = 0; i < n; ++i) {
    quadratic(i) = x.p.dot(inv_grad.middleRows(i * n, n) * x.p);
  }

  Vector out(2 * n);
  out.head(n) = inertia_inv * x.p;
  out.tail(n) = -0.5 * quadratic - sys.potential_gradient(x.q) +
                sys.input_matrix * torque;
  return out;
}

double kinetic_energy(const MechanicalSystem& sys, const FullState& x) {
  return 0.5 * x.p.dot(sys.inertia(x.q).llt().solve(x.p));
}

double total_energy(const MechanicalSystem& sys, const FullState& x) {
  return kinetic_energy(sys, x) + sys.potential(x.q);
}

double poisson_bracket(const PhaseFunction& f, const PhaseFunction& g,
                       const FullState& x) {
  const int n = x.dof();
  auto partial = [&x](const PhaseFunction& fn, bool momentum, int i) {
    FullState shifted = x;
    Vector& coords = momentum ? shifted.p : shifted.q;
    const double base = coords(i);
    const double h = kBracketStep * std::max(1.0, std::abs(base));
    coords(i) = base + h;
    const double up = fn(shifted);
    coords(i) = base - h;
    const double down = fn(shifted);
    return (up - down) / (2.0 * h);
  };
  double sum = 0.0;
  for (int i = 0; i < n; ++i) {
    sum += partial(f, true, i) * partial(g, false, i) -
           partial(f, false, i) * partial(g, true, i);
  }
  return sum;
}

}  // namespace giant_swing

#pragma once

// Simply-actuated Hamiltonian systems: system description, the Hamiltonian
// vector field, input normalization, the canonical change of coordinates that
// decouples the inputs, and a finite-difference Poisson bracket.

#include <Eigen/Dense>

#include <functional>
#include <limits>
#include <numbers>
#include <vector>

namespace giant_swing {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

inline constexpr double kPi = std::numbers::pi;
inline constexpr double kInfinitePeriod = std::numeric_limits<double>::infinity();

/// Wraps an angle to (-pi, pi].
double wrap_angle(double angle);

/// Point in phase space: configurations q and their conjugate momenta p.
struct FullState {
  Vector q;
  Vector p;

  int dof() const { return static_cast<int>(q.size()); }
};

/// A mechanical system with Hamiltonian H(q,p) = 1/2 p^T M^{-1}(q) p + V(q)
/// and a constant input matrix B (n x k, k < n).
///
/// `inertia_gradient` returns the n*n x n block matrix of stacked partials
/// [dM/dq_1; ...; dM/dq_n]. The gradient of M^{-1} is derived from it
/// (see inverse_inertia_gradient).
struct MechanicalSystem {
  int dof = 0;
  int inputs = 0;
  std::function<Matrix(const Vector&)> inertia;
  std::function<double(const Vector&)> potential;
  std::function<Vector(const Vector&)> potential_gradient;
  std::function<Matrix(const Vector&)> inertia_gradient;
  Matrix input_matrix;
  // 2*pi for angles, kInfinitePeriod for displacements.
  std::vector<double> periods;
};

/// Throws DomainError if dimensions are inconsistent, k >= n, or B is rank
/// deficient.
void validate(const MechanicalSystem& sys);

/// Builds a system from inertia and potential alone; the gradients are
/// filled in by central differences with step 1e-7.
MechanicalSystem make_system_with_fd_gradients(
    int dof, std::function<Matrix(const Vector&)> inertia,
    std::function<double(const Vector&)> potential, Matrix input_matrix,
    std::vector<double> periods);

/// Stacked partials of M^{-1}: d(M^{-1})/dq_i = -M^{-1} (dM/dq_i) M^{-1}.
Matrix inverse_inertia_gradient(const MechanicalSystem& sys, const Vector& q);

/// Wraps the angular coordinates of q to (-pi, pi]; displacements untouched.
Vector wrap_configuration(const MechanicalSystem& sys, const Vector& q);

struct InputNormalization {
  Matrix feedback;        // T_hat, k x k, tau = T_hat * tau_hat
  Matrix normalized_input;  // B_hat = B * T_hat, satisfies B_hat^T B_hat = I
};

/// Finds T_hat such that B * T_hat has orthonormal columns. Uses a one-sided
/// Jacobi SVD, B = U diag(sigma) V^T, and T_hat = V diag(1/sigma).
InputNormalization normalize_input_matrix(const Matrix& input_matrix);

/// Result of the canonical transform (q~, p~) = ((Bb^T)^{-1} q, Bb p) with
/// Bb = [B_perp; B^T]. The transformed system has input matrix [0; I_k].
struct SimplyActuatedForm {
  MechanicalSystem system;
  Matrix basis;  // Bb, n x n

  FullState to_simply_actuated(const FullState& x) const;
  FullState from_simply_actuated(const FullState& x) const;
};

/// Requires a left semi-orthogonal input matrix (see normalize_input_matrix)
/// and a full-rank left annihilator B_perp ((n-k) x n, B_perp * B = 0).
SimplyActuatedForm simply_actuated_transform(const MechanicalSystem& sys,
                                             const Matrix& annihilator);

/// Hamiltonian vector field (q_dot, p_dot) stacked into a 2n-vector:
///   q_dot = M^{-1} p
///   p_dot = -1/2 (I_n kron p^T) grad_q(M^{-1}) p - grad_q V + B tau
Vector full_vector_field(const MechanicalSystem& sys, const FullState& x,
                         const Vector& torque);

double kinetic_energy(const MechanicalSystem& sys, const FullState& x);
double total_energy(const MechanicalSystem& sys, const FullState& x);

using PhaseFunction = std::function<double(const FullState&)>;

/// [f, g] = sum_i df/dp_i dg/dq_i - df/dq_i dg/dp_i, with partials from
/// central differences (relative step 1e-6).
double poisson_bracket(const PhaseFunction& f, const PhaseFunction& g,
                       const FullState& x);

}  // namespace giant_swing

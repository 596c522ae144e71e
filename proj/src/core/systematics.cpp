#include "core/systematics.hpp"

#include <Eigen/Dense>
#include <cmath>

#include "core/angular.hpp"
#include "core/constants.hpp"
#include "core/errors.hpp"

namespace combraman::systematics {

using namespace consts;

void ShiftBudget::add(ShiftEntry e) {
  for (const auto& existing : entries)
    if (existing.name == e.name)
      throw ConfigError("duplicate budget entry: " + e.name);
  if (e.sigma_hz < 0.0)
    throw ConfigError("negative uncertainty for budget entry " + e.name);
  total_hz += e.shift_hz;
  sigma_hz = std::hypot(sigma_hz, e.sigma_hz);
  entries.push_back(std::move(e));
}

namespace {

// Fine-structure doublet of an L, S = 1/2 term in the |mL, mS> product
// basis: H/h = a L.S + (mu_B B / h)(mL + g_s mS), a = 2 nu_fs / (2L + 1).
struct DoubletModel {
  int L;
  double a_hz;           // L.S coupling constant
  double e_upper0;       // zero-field energy of J = L + 1/2, Hz
  int dim;               // 2 (2L + 1)

  DoubletModel(int l, double fs_gap_hz, double upper0)
      : L(l), a_hz(2.0 * fs_gap_hz / (2.0 * l + 1.0)), e_upper0(upper0),
        dim(2 * (2 * l + 1)) {}

  // basis index -> (mL, mS)
  std::pair<double, double> basis(int k) const {
    return {static_cast<double>(k / 2 - L), (k % 2 == 0) ? -0.5 : 0.5};
  }

  Eigen::MatrixXd hamiltonian(double b_tesla, double g_s) const {
    Eigen::MatrixXd h = Eigen::MatrixXd::Zero(dim, dim);
    const double zeeman = mu_bohr_hz_per_t * b_tesla;
    for (int k = 0; k < dim; ++k) {
      const auto [ml, ms] = basis(k);
      h(k, k) = a_hz * ml * ms + zeeman * (ml + g_s * ms);
      // L+ S- couples (ml, -1/2+1) ... both ladder directions:
      if (ms < 0.0 && ml > -L) {
        // <ml-1, +1/2| L- S+ |ml, -1/2>
        const double lm = std::sqrt(L * (L + 1.0) - ml * (ml - 1.0));
        const int k2 = (static_cast<int>(ml - 1.0) + L) * 2 + 1;
        h(k2, k) += a_hz / 2.0 * lm;
        h(k, k2) += a_hz / 2.0 * lm;
      }
    }
    return h;
  }

  // Energy (Hz) of the state adiabatically connected to |J, mJ>.
  double energy(double b_tesla, double g_s, double J, double mJ) const {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(hamiltonian(b_tesla, g_s));
    // Zero-field eigenvector from Clebsch-Gordan coefficients.
    Eigen::VectorXd ref = Eigen::VectorXd::Zero(dim);
    for (int k = 0; k < dim; ++k) {
      const auto [ml, ms] = basis(k);
      ref(k) = angular::clebsch_gordan(L, ml, 0.5, ms, J, mJ);
    }
    int best = -1;
    double best_ov = 0.0;
    for (int k = 0; k < dim; ++k) {
      const double ov = std::abs(ref.dot(es.eigenvectors().col(k)));
      if (ov > best_ov) {
        best_ov = ov;
        best = k;
      }
    }
    if (best_ov * best_ov < 0.5)
      throw ComputeError(
          "field too strong: Zeeman state no longer identifiable with a "
          "fine-structure level");
    const double offset = e_upper0 - a_hz * L / 2.0;  // J = L+1/2 at a L/2
    return offset + es.eigenvalues()(best);
  }
};

}  // namespace

ZeemanQuadratic second_order_zeeman(const atomic::LevelScheme& levels,
                                    const atomic::MagneticField& field,
                                    double m_upper, double m_lower,
                                    double spin_g) {
  if (field.tesla < 0.0) throw ConfigError("negative magnetic field");
  const auto& d52 = levels.manifold("D5/2");
  const auto& d32 = levels.manifold("D3/2");
  const double gap = (d52.energy - d32.energy) / two_pi;  // Hz
  DoubletModel model(2, gap, gap);  // zero of energy at D3/2 (B = 0)

  auto splitting = [&](double b, double mu, double ml) {
    return model.energy(b, spin_g, 2.5, mu) - model.energy(b, spin_g, 1.5, ml);
  };
  // Averaging the pair (m, m') with (-m, -m') cancels all odd orders in B.
  auto quadratic = [&](double b) {
    if (b == 0.0) return 0.0;
    return (splitting(b, m_upper, m_lower) +
            splitting(b, -m_upper, -m_lower)) / 2.0 - gap;
  };

  ZeemanQuadratic out;
  out.shift_hz = quadratic(field.tesla);
  if (field.sigma > 0.0) {
    const double db = field.sigma;
    out.sigma_hz = std::abs(quadratic(field.tesla + db) - out.shift_hz);
  }
  return out;
}

void TrapConfig::validate() const {
  if (axial_freq_hz <= 0.0) throw ConfigError("axial frequency must be > 0");
  if (radial_freq_hz < 0.0) throw ConfigError("negative radial frequency");
  if (ion_mass_kg <= 0.0) throw ConfigError("ion mass must be > 0");
  if (ion_charge_c <= 0.0) throw ConfigError("ion charge must be > 0");
}

double quadrupole_shift(const atomic::ZeemanState& state,
                        const TrapConfig& trap) {
  trap.validate();
  const double j = state.fine.J;
  if (j < 1.0) return 0.0;  // no quadrupole moment for J < 1
  double theta_em2 = 0.0;
  if (state.fine.label == "D3/2")
    theta_em2 = trap.theta_d32_em2;
  else if (state.fine.label == "D5/2")
    theta_em2 = trap.theta_d52_em2;
  if (theta_em2 == 0.0)
    throw ConfigError("no quadrupole moment supplied for " + state.fine.label);
  const double wz = two_pi * trap.axial_freq_hz;
  const double grad = trap.ion_mass_kg * wz * wz / trap.ion_charge_c;  // V/m^2
  const double theta = theta_em2 * e_charge;  // C m^2
  const double structure =
      (j * (j + 1.0) - 3.0 * state.mJ * state.mJ) / (j * (2.0 * j - 1.0));
  return -theta * grad * structure * trap.quad_angle_factor / (4.0 * h_planck);
}

double quadrupole_shift_differential(const atomic::ZeemanState& upper,
                                     const atomic::ZeemanState& lower,
                                     const TrapConfig& trap) {
  return quadrupole_shift(upper, trap) - quadrupole_shift(lower, trap);
}

double bbr_shift(const TrapConfig& trap) {
  if (trap.temperature_k < 0.0) throw ConfigError("negative temperature");
  const double e2 = bbr_field_300k * bbr_field_300k;
  const double scale = std::pow(trap.temperature_k / 300.0, 4.0);
  const double dalpha = trap.diff_polarizability_au * polarizability_au;
  return -dalpha * e2 * scale / (2.0 * h_planck);
}

double bbr_shift_sigma(const TrapConfig& trap) {
  if (trap.temperature_k <= 0.0 || trap.temperature_sigma_k <= 0.0) return 0.0;
  return std::abs(bbr_shift(trap) * 4.0 * trap.temperature_sigma_k /
                  trap.temperature_k);
}

ShiftBudget build_budget(const std::vector<BudgetEntryConfig>& entries,
                         double nu0_hz) {
  ShiftBudget budget;
  for (const auto& e : entries) {
    switch (e.mode) {
      case EntryMode::declared:
        budget.add({e.name, e.shift_hz, e.sigma_hz});
        break;
      case EntryMode::fractional:
        if (nu0_hz <= 0.0)
          throw ConfigError("fractional budget entry needs a reference "
                            "frequency");
        budget.add({e.name, e.fraction * nu0_hz, e.sigma_hz});
        break;
      case EntryMode::computed:
        throw ConfigError("computed budget entry '" + e.name +
                          "' was not resolved before assembly");
    }
  }
  return budget;
}

}  // namespace combraman::systematics

// material_geometry.hpp: Drude metal, wire, emitter array, unit conventions
//
// Units: hbar = 1, energies in eV, lengths in nm, time in hbar/eV.
// A frequency omega (eV) has vacuum wavenumber k0 = omega / (hbar c) in 1/nm.

#pragma once

#include <cmath>
#include <complex>
#include <numbers>
#include <string>

#include "plasmon_qi/errors.hpp"

namespace plasmon_qi {

using cplx = std::complex<double>;

namespace units {
inline constexpr double kHbarC = 197.3269804; // eV nm

inline double wavenumber(double omega) { return omega / kHbarC; }
inline double wavelength(double omega) { return 2.0 * std::numbers::pi * kHbarC / omega; }
} // namespace units

struct DrudeMetal {
    double eps_inf = 5.7;
    double omega_p = 9.0; // eV
    double gamma_p = 0.1; // eV

    static DrudeMetal silver() { return {}; }

    void validate() const {
        if (!(omega_p > 0.0)) throw ValidationError("metal.omega_p must be > 0");
        if (!(gamma_p >= 0.0)) throw ValidationError("metal.gamma_p must be >= 0");
        if (!(eps_inf >= 1.0)) throw ValidationError("metal.eps_inf must be >= 1");
    }

    /// Frequency of the flat-interface surface plasmon, omega_p / sqrt(eps_inf + 1).
    double surface_plasmon_frequency() const { return omega_p / std::sqrt(eps_inf + 1.0); }
};

inline cplx permittivity(const DrudeMetal& metal, double omega) {
    if (!(omega > 0.0)) throw DomainError("permittivity: omega must be > 0");
    return metal.eps_inf - metal.omega_p * metal.omega_p / (omega * cplx(omega, metal.gamma_p));
}

enum class MetalModel { drude, vacuum };

/// The wire material. `vacuum` removes the wire (eps = 1) and serves as the
/// homogeneous-space reference.
struct Metal {
    MetalModel model = MetalModel::drude;
    DrudeMetal drude{};

    cplx permittivity(double omega) const {
        if (model == MetalModel::vacuum) {
            if (!(omega > 0.0)) throw DomainError("permittivity: omega must be > 0");
            return 1.0;
        }
        return plasmon_qi::permittivity(drude, omega);
    }

    void validate() const {
        if (model == MetalModel::drude) drude.validate();
    }
};

struct WireGeometry {
    double radius = 0.0; // nm

    void validate() const {
        if (!(radius > 0.0)) throw ValidationError("geometry.radius must be > 0");
    }
};

/// N identical emitters on a line parallel to the wire axis, dipoles radial.
struct EmitterArray {
    int count = 2;
    double omega_0 = 2.0;   // eV
    double gamma_0 = 1e-4;  // eV
    double r_a = 0.0;       // nm, distance from the wire axis
    double d = 0.0;         // nm, spacing along z

    void validate(const WireGeometry& wire) const {
        if (count < 1) throw ValidationError("emitters.count must be >= 1");
        if (!(omega_0 > 0.0)) throw ValidationError("emitters.omega_0 must be > 0");
        if (!(gamma_0 > 0.0)) throw ValidationError("emitters.gamma_0 must be > 0");
        if (!(d >= 0.0)) throw ValidationError("emitters.d must be >= 0");
        if (!(r_a > wire.radius)) {
            throw ValidationError("emitters.r_a must exceed geometry.radius (r_a = " +
                                  std::to_string(r_a) + ", R = " + std::to_string(wire.radius) + ")");
        }
    }

    double lambda_0() const { return units::wavelength(omega_0); }
};

/// sqrt(k^2 - kz^2) on the branch Im >= 0 (Re >= 0 when the root is real).
inline cplx radial_wavenumber(cplx k, double kz) {
    cplx root = std::sqrt(k * k - kz * kz);
    if (root.imag() < 0.0 || (root.imag() == 0.0 && root.real() < 0.0)) root = -root;
    // sqrt of a negative real with a -0.0 imaginary part lands on the lower branch;
    // after the flip the real part can be -0.0
    if (root.real() == 0.0) root = cplx(0.0, root.imag());
    if (root.imag() == 0.0) root = cplx(root.real(), 0.0);
    return root;
}

} // namespace plasmon_qi

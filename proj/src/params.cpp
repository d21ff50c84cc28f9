#include "bristle/params.hpp"

#include <sstream>
#include <stdexcept>

namespace bristle {

namespace {

void require(bool cond, const char* msg) {
    if (!cond) throw std::invalid_argument(msg);
}

} // namespace

void RobotParams::validate() const {
    require(std::isfinite(mass) && mass > 0.0, "mass must be > 0");
    require(std::isfinite(gravity) && gravity >= 0.0, "gravity must be >= 0");
    require(std::isfinite(leg_length) && leg_length > 0.0, "leg_length must be > 0");
    require(std::isfinite(kappa) && kappa > 0.0, "kappa must be > 0");
    require(std::isfinite(zeta) && zeta >= 0.0, "zeta must be >= 0");
    require(std::isfinite(mu_s) && mu_s >= 0.0, "mu_s must be >= 0");
    require(std::isfinite(mu_k) && mu_k >= 0.0, "mu_k must be >= 0");
    require(std::isfinite(theta0) && theta0 > 0.0 && theta0 < M_PI / 2,
            "theta0 must lie in (0, pi/2)");
}

std::vector<std::string> RobotParams::warnings() const {
    std::vector<std::string> out;
    if (mu_k > mu_s) {
        std::ostringstream os;
        os << "mu_k (" << mu_k << ") exceeds mu_s (" << mu_s
           << "); kinetic friction stronger than static is unusual";
        out.push_back(os.str());
    }
    return out;
}

void DriveSignal::validate() const {
    if (!(std::isfinite(amplitude) && amplitude >= 0.0))
        throw std::invalid_argument("drive amplitude must be >= 0");
    if (!(std::isfinite(omega) && omega >= 0.0))
        throw std::invalid_argument("drive omega must be >= 0");
    if (!std::isfinite(phase)) throw std::invalid_argument("drive phase must be finite");
}

} // namespace bristle

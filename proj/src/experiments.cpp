#include <qkd/cli.hpp>

namespace qkd::cli {

const std::vector<ExperimentInfo>& experiment_catalog() {
  static const std::vector<ExperimentInfo> catalog = {
      {"fbs_fidelity",
       "time-bin state fidelity surfaces over (theta, phi) for each scatterer width"},
      {"fbs_keyrate",
       "key rate vs rotation angle: collective unitary for the qubit protocols, scatterer "
       "channel for the two-photon encoding"},
      {"loss_keyrate", "key rate vs channel loss 0-60 dB for every protocol (slope -N/10)"},
      {"mixed_theta",
       "key rate under a uniform theta mixture of scatterer channels, per scatterer width"},
      {"dispersion_keyrate", "key rate vs dispersion coefficient alpha_n (n = 1 or 2)"},
      {"optimize_encoding",
       "time-bin fidelity vs theta for several bin widths sigma_t and scatterer widths"},
      {"phase_surface", "accumulated logical phase over (theta, phi) per scatterer width"},
      {"bit_error_surface", "frequency/time cross-fidelity (bit error) over (theta, phi)"},
      {"multi_fbs", "fidelity surfaces with one, two, or three scatterer pairs active"},
      {"deviations",
       "fidelity surfaces when the second photon sees offset scatterer parameters"},
      {"alt_encoding",
       "closed-form incurred loss and error rates of the four-frequency-bin alternative"},
  };
  return catalog;
}

}  // namespace qkd::cli

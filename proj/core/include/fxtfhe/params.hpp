#pragma once

#include <cstdint>
#include <string>

namespace fxtfhe {

struct TfheParams {
  std::string name = "custom";
  int n = 0;      // TLWE dimension
  int k = 0;      // TGLWE dimension
  int N = 0;      // polynomial size
  int beta = 0;   // decomposition base log
  int l = 0;      // decomposition levels
  double sigma_tlwe = 0.0;
  double sigma_tglwe = 0.0;

  // Throws std::invalid_argument on violation.
  void validate() const;
  std::uint64_t hash() const;
  int extracted_dimension() const { return k * N; }
  int tggsw_rows() const { return (k + 1) * l; }

  // n=586, k=2, N=512, beta=8, l=2.
  static TfheParams set_i();
  // n=500, k=1, N=1024, beta=10, l=2.
  static TfheParams set_ii();
  // "I" or "II".
  static TfheParams preset(const std::string& name);
};

}  // namespace fxtfhe

// Generates the synthetic antenatal-style demo dataset under data/.
// Values are correlated so the models have structure to learn; the seed is
// fixed so the shipped files are reproducible.

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iostream>

#include "impute/rng.hpp"

namespace {

int clamp_int(double v, int lo, int hi) {
  return std::clamp(static_cast<int>(std::lround(v)), lo, hi);
}

}  // namespace

int main(int argc, char** argv) {
  const std::string out = argc > 1 ? argv[1] : "data/demo.csv";
  const int rows = argc > 2 ? std::stoi(argv[2]) : 800;

  const char* races[] = {"Asian", "Black", "Colored", "Other", "White"};
  const char* provinces[] = {"EC", "FS", "GP", "KZN", "LP", "MP", "NC", "NW", "WC"};

  std::ofstream csv(out);
  if (!csv) {
    std::cerr << "cannot write " << out << "\n";
    return 1;
  }
  csv << "Age,Education,FathersAge,Gravidity,Parity,Race,Province,HIV\n";

  impute::Rng rng(20010101);
  for (int i = 0; i < rows; ++i) {
    const double base = rng.normal();
    const int age = clamp_int(27.0 + 7.0 * base + 2.0 * rng.normal(), 14, 50);
    const int education =
        clamp_int(8.0 + 2.5 * rng.normal() - 0.15 * (age - 27), 0, 13);
    const int fathers_age = clamp_int(age + 4.0 + 3.0 * rng.normal(), 14, 80);
    const int gravidity = clamp_int(0.22 * (age - 14) + 0.9 * rng.normal(), 0, 12);
    const int parity = clamp_int(gravidity - std::abs(rng.normal()) * 0.8, 0, gravidity);
    const int race = static_cast<int>(rng.index(5));
    const int province = static_cast<int>(rng.index(9));
    const double hiv_logit =
        -1.1 + 0.06 * (30 - std::abs(age - 30)) - 0.08 * education + 0.15 * (province % 3);
    const int hiv = rng.uniform() < 1.0 / (1.0 + std::exp(-hiv_logit)) ? 1 : 0;

    csv << age << ',' << education << ',' << fathers_age << ',' << gravidity << ','
        << parity << ',' << races[race] << ',' << provinces[province] << ',' << hiv << '\n';
  }
  std::cout << "wrote " << rows << " rows to " << out << "\n";
  return 0;
}

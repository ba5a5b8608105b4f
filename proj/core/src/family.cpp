#include "wcvi/family.hpp"

#include <cinttypes>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace wcvi {

int flat_length(int d, CopulaVariant variant) {
  return d * kMarginalBlock + copula_param_count(variant, d);
}

std::vector<double> pack(const VariationalParams& zeta) {
  const int d = zeta.dim();
  std::vector<double> flat;
  flat.reserve(flat_length(d, zeta.copula.variant));
  for (const auto& m : zeta.marginals) {
    if (static_cast<int>(m.coeffs.size()) != kMarginalCoeffs)
      throw InvalidInputError("pack: marginal must carry exactly 32 coefficients");
    flat.insert(flat.end(), m.coeffs.begin(), m.coeffs.end());
    flat.push_back(m.delta1);
    flat.push_back(m.log_width);
  }
  if (zeta.copula.variant == CopulaVariant::Gaussian) {
    if (static_cast<int>(zeta.copula.raw.size()) != copula_param_count(CopulaVariant::Gaussian, d))
      throw InvalidInputError("pack: copula block has wrong length");
    flat.insert(flat.end(), zeta.copula.raw.begin(), zeta.copula.raw.end());
  }
  return flat;
}

VariationalParams unpack(std::span<const double> flat, int d, CopulaVariant variant) {
  if (static_cast<int>(flat.size()) != flat_length(d, variant))
    throw InvalidInputError("unpack: flat vector has wrong length");
  VariationalParams zeta;
  zeta.marginals.resize(d);
  for (int j = 0; j < d; ++j) {
    auto block = flat.subspan(static_cast<std::size_t>(j) * kMarginalBlock, kMarginalBlock);
    zeta.marginals[j].coeffs.assign(block.begin(), block.begin() + kMarginalCoeffs);
    zeta.marginals[j].delta1 = block[kMarginalCoeffs];
    zeta.marginals[j].log_width = block[kMarginalCoeffs + 1];
  }
  zeta.copula.variant = variant;
  if (variant == CopulaVariant::Gaussian) {
    auto tail = flat.subspan(static_cast<std::size_t>(d) * kMarginalBlock);
    zeta.copula.raw.assign(tail.begin(), tail.end());
  }
  return zeta;
}

std::string variant_name(CopulaVariant v) {
  return v == CopulaVariant::Gaussian ? "gaussian" : "independence";
}

CopulaVariant parse_variant(const std::string& name) {
  if (name == "gaussian") return CopulaVariant::Gaussian;
  if (name == "independence") return CopulaVariant::Independence;
  throw InvalidInputError("unknown copula variant: " + name);
}

void write_checkpoint(const std::string& path, const VariationalParams& zeta) {
  std::vector<double> flat = pack(zeta);
  std::ofstream out(path);
  if (!out) throw InvalidInputError("cannot open checkpoint for writing: " + path);
  out << "wcvi 1\n";
  out << "dim " << zeta.dim() << "\n";
  out << "variant " << variant_name(zeta.copula.variant) << "\n";
  out << "grid " << kMarginalCoeffs << "\n";
  out << "values " << flat.size() << "\n";
  char buf[64];
  for (double v : flat) {
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    out << buf << "\n";
  }
  if (!out) throw InvalidInputError("write failure on checkpoint: " + path);
}

VariationalParams read_checkpoint(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InvalidInputError("cannot open checkpoint: " + path);
  auto expect = [&](const std::string& key) {
    std::string word;
    if (!(in >> word) || word != key)
      throw InvalidInputError("checkpoint " + path + ": expected '" + key + "'");
  };
  expect("wcvi");
  int version = 0;
  in >> version;
  if (version != 1) throw InvalidInputError("checkpoint " + path + ": unsupported version");
  expect("dim");
  int d = 0;
  in >> d;
  expect("variant");
  std::string vname;
  in >> vname;
  CopulaVariant variant = parse_variant(vname);
  expect("grid");
  int grid = 0;
  in >> grid;
  if (grid != kMarginalCoeffs)
    throw InvalidInputError("checkpoint " + path + ": unsupported grid size");
  expect("values");
  std::size_t count = 0;
  in >> count;
  if (d < 1 || static_cast<int>(count) != flat_length(d, variant))
    throw InvalidInputError("checkpoint " + path + ": header is inconsistent");
  std::vector<double> flat(count);
  for (std::size_t i = 0; i < count; ++i) {
    if (!(in >> flat[i]))
      throw InvalidInputError("checkpoint " + path + ": truncated value list");
  }
  return unpack(flat, d, variant);
}

}  // namespace wcvi

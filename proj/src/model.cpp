#include "convopt/model.hpp"

namespace convopt {

ConvParams validate_params(const ConvParams& raw) {
  const Int* fields[] = {&raw.B, &raw.C, &raw.K, &raw.W, &raw.H,
                         &raw.R, &raw.S, &raw.sigma_w, &raw.sigma_h};
  for (const Int* f : fields)
    if (*f < 1) throw InvalidParams(ParamError::NonPositive);
  if (raw.R > raw.sigma_w * raw.W || raw.S > raw.sigma_h * raw.H)
    throw InvalidParams(ParamError::FilterTooLarge);
  if (raw.sigma_w > raw.R || raw.sigma_h > raw.S)
    throw InvalidParams(ParamError::StrideTooLarge);
  return raw;
}

ArraySizes array_sizes(const ConvParams& p) {
  ArraySizes s;
  s.out_words = p.K * p.H * p.W * p.B;
  s.filter_words = p.kind == KernelKind::Pooling ? Int(0) : p.K * p.C * p.R * p.S;
  s.image_words = p.C * (p.sigma_h * p.H + p.S) * (p.sigma_w * p.W + p.R) * p.B;
  s.image_words_simplified = p.C * p.H * p.W * p.B * p.sigma_h * p.sigma_w;
  return s;
}

Int total_flops(const ConvParams& p) {
  return p.B * p.C * p.K * p.W * p.H * p.R * p.S;
}

}  // namespace convopt

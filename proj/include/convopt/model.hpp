#pragma once

#include <stdexcept>
#include <string>

#include "convopt/numeric.hpp"

namespace convopt {

enum class KernelKind { Convolution, Pooling };

/// The seven loop bounds and two strides that define a convolution or
/// pooling layer:
///
///   for {b,c,k,w,h,r,s} = 0 : {B,C,K,W,H,R,S}-1
///     Out(k,h,w,b) += Image(r + sigma_w*w, s + sigma_h*h, c, b) * Filter(k,r,s,c)
///
/// Pooling uses the same nest without the Filter array.
struct ConvParams {
  Int B = 1, C = 1, K = 1, W = 1, H = 1, R = 1, S = 1;
  Int sigma_w = 1, sigma_h = 1;
  KernelKind kind = KernelKind::Convolution;
};

/// Fast-memory capacity in words.
struct CacheModel {
  Int M = 1;
};

struct ArraySizes {
  Int out_words = 0;
  Int image_words = 0;
  Int filter_words = 0;
  Int image_words_simplified = 0;
};

enum class ParamError { NonPositive, FilterTooLarge, StrideTooLarge };

inline const char* param_error_name(ParamError e) {
  switch (e) {
    case ParamError::NonPositive: return "NonPositive";
    case ParamError::FilterTooLarge: return "FilterTooLarge";
    case ParamError::StrideTooLarge: return "StrideTooLarge";
  }
  return "?";
}

class InvalidParams : public std::runtime_error {
 public:
  ParamError code;
  explicit InvalidParams(ParamError c)
      : std::runtime_error(std::string("invalid layer parameters: ") +
                           param_error_name(c)),
        code(c) {}
};

/// Checks the model assumptions: every count >= 1, the filter fits inside
/// the input (R <= sigma_w*W, S <= sigma_h*H) and every Image element is
/// used (sigma_w <= R, sigma_h <= S). Returns the params unchanged.
ConvParams validate_params(const ConvParams& raw);

ArraySizes array_sizes(const ConvParams& p);

/// B*C*K*W*H*R*S, the total iteration count of the seven-loop nest.
Int total_flops(const ConvParams& p);

inline ConvParams alexnet_params() {
  ConvParams p;
  p.B = 1000; p.C = 3; p.K = 96; p.W = 55; p.H = 55;
  p.R = 11; p.S = 11; p.sigma_w = 4; p.sigma_h = 4;
  return p;
}

}  // namespace convopt

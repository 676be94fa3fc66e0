// Copyright 2026 The qdslab Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.


// Reference values produced by tests/oracles/derive_values.py (numpy/scipy/mpmath).

#pragma once

namespace qdslab::oracle {

inline constexpr double kC2Cubic = 16.0;
inline constexpr double kC3CubicC1 = 5.656000000000001;
inline constexpr double kC3CubicContinuum = 5.656854249492381;
inline constexpr double kC4NegCubic = 75.0;
inline constexpr double kLapTopN16 = -1.9155262855610495;
inline constexpr double kOuAt0 = 0.8854983831669223;
inline constexpr double kOuAt1 = 0.6225528171389103;
inline constexpr double kHeatAt0 = 0.8451542547285166;
inline constexpr double kHeatAt1 = 0.4137382164414179;
inline constexpr double kCfK64 = 3.4886289547645717;
inline constexpr double kCfK128 = 3.5636986400105806;
inline constexpr double kRelHG0N64 = 0.9876849400203203;
inline constexpr double kRelHG0N128 = 0.9926539711240471;

}  // namespace qdslab::oracle

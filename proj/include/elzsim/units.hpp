// Copyright 2026 The elzsim Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

// Unit conventions used throughout elzsim:
//   energy       µeV
//   temperature  mK
//   rate         Hz
//   short times  µs (traces, windows, gate durations)
//   T1           ms
//   qubit drive  MHz, resonance in GHz
// Every conversion between these lives here.

namespace elzsim::units {

/// Boltzmann constant in µeV per mK (CODATA 2018, exact).
inline constexpr double kBoltzmannUeVPerMk = 8.617333262e-5 * 1e6 / 1e3;

/// Planck constant in µeV per GHz (CODATA 2018, exact).
inline constexpr double kPlanckUeVPerGhz = 4.135667696;

inline constexpr double thermal_energy_uev(double temperature_mk) {
    return kBoltzmannUeVPerMk * temperature_mk;
}

inline constexpr double us_to_s(double us) { return us * 1e-6; }
inline constexpr double s_to_us(double s) { return s * 1e6; }
inline constexpr double ms_to_us(double ms) { return ms * 1e3; }

/// Mean dwell time in µs for a rate in Hz.
inline constexpr double rate_to_time_us(double rate_hz) { return 1e6 / rate_hz; }
inline constexpr double time_us_to_rate(double time_us) { return 1e6 / time_us; }

}  // namespace elzsim::units

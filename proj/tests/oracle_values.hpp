/*
 * Copyright 2026 The tailfair Authors.
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

// Generated by tests/oracles/derive_oracles.py. Do not edit.
#pragma once
#include <array>
#include <cstddef>
namespace oracle {
inline constexpr std::array<std::size_t, 10> kLongTail_5000_10_100{5000, 2997, 1796, 1077, 645, 387, 232, 139, 83, 50};
inline constexpr std::array<std::size_t, 10> kLongTail_5000_10_50{5000, 3237, 2096, 1357, 878, 568, 368, 238, 154, 100};
inline constexpr std::array<std::size_t, 10> kLongTail_5000_10_10{5000, 3871, 2997, 2320, 1796, 1391, 1077, 834, 645, 500};
inline constexpr std::array<std::size_t, 100> kLongTail_5000_100_100{5000, 4772, 4555, 4348, 4151, 3962, 3782, 3610, 3446, 3289, 3140, 2997, 2861, 2731, 2607, 2488, 2375, 2267, 2164, 2066, 1972, 1882, 1796, 1715, 1637, 1562, 1491, 1424, 1359, 1297, 1238, 1182, 1128, 1077, 1028, 981, 936, 894, 853, 814, 777, 742, 708, 676, 645, 616, 588, 561, 536, 511, 488, 466, 445, 424, 405, 387, 369, 352, 336, 321, 306, 292, 279, 266, 254, 243, 232, 221, 211, 201, 192, 183, 175, 167, 159, 152, 145, 139, 132, 126, 121, 115, 110, 105, 100, 95, 91, 87, 83, 79, 75, 72, 69, 66, 63, 60, 57, 54, 52, 50};
inline constexpr std::array<std::size_t, 7> kLongTail_37_7_3p7{37, 29, 23, 19, 15, 12, 9};
inline constexpr double kPhiMinus1 = 0.15865525393145705;
inline constexpr double kPhi2p5 = 0.99379033467422386;
inline constexpr double kPhiMinus5OverPhiMinus1 = 0.0000018067575121277383;
inline constexpr double kLogPhiMinus40 = -804.60844201375379;
inline constexpr double kLogPhiMinus8 = -35.01343715991455;
inline constexpr double kSymOffDiag_10_0p2 = 0.022222222222222222;
struct ErrorCase { double mu_plus, mu_minus, sigma, eta, prior, rhp, rhm, rtp, rtm, theta;
  double clean_hp, clean_tp, clean_hm, clean_tm, noisy_hp, noisy_tp, noisy_hm, noisy_tm, g, h; };
inline constexpr std::array<ErrorCase, 8> kErrorCases{{
  ErrorCase{5.0, -5.0, 1.0, 1.0, 0.5, 0.10000000000000001, 0.20000000000000001, 0.0, 0.0, 0.0, 0.0, 0.0000018067575121277383, 0.0, 0.0000018067575121277383, 0.10000000000000001, 0.00000090337875606386915, 0.050000000000000003, 0.00000090337875606386915, 0.82196283489316906, 0.053033357265711802},
  ErrorCase{5.0, -5.0, 1.0, 1.0, 0.5, 0.10000000000000001, 0.050000000000000003, 0.29999999999999999, 0.20000000000000001, -4.5, 0.0, 0.000000000000000000006614665959878325, 0.17814609943771989, 1.0, 0.020546347514057004, 0.0000000000000000000023151330859574138, 0.13461939723291695, 0.54999999999999999, 1.4580862912589149, 2.0601968462911846},
  ErrorCase{5.0, -5.0, 1.0, 1.0, 0.5, 0.10000000000000001, 0.050000000000000003, 0.29999999999999999, 0.20000000000000001, 4.2000000000000002, 0.063232277732207481, 1.0, 0.0, 0.00000000000000000011280740899934225, 0.053454524979493368, 0.45000000000000001, 0.046838386113389629, 0.0000000000000000000451229635997369, 0.93509647678316511, 1.2868106270042424},
  ErrorCase{5.0, -5.0, 1.0, 1.0, 0.5, 0.10000000000000001, 0.050000000000000003, 0.29999999999999999, 0.20000000000000001, -3.8999999999999999, 0.0, 0.000000000000000001760001201186829, 0.0, 0.85509970571156573, 0.025000000000000001, 0.014490029428843429, 0.050000000000000003, 0.49203988228462628, 0.95863669309804051, 0.91611212693481589},
  ErrorCase{5.0, -5.0, 1.0, 1.0, 0.5, 0.10000000000000001, 0.050000000000000003, 0.29999999999999999, 0.20000000000000001, 6.5, 0.92059473648461413, 1.0, 0.0, 0.0000000000000000000000000000041572978408664674, 0.43926763141807636, 0.45000000000000001, 0.0039702631757692939, 0.0000000000000000000000000000016629191363465869, 2.6400606576243979, 5.6060532184686988},
  ErrorCase{3.0, 1.0, 0.69999999999999996, 0.5, 0.29999999999999999, 0.25, 0.10000000000000001, 0.40000000000000002, 0.050000000000000003, 1.2, 0.0, 0.016412898396757742, 0.11426642340992531, 1.0, 0.062001350361305233, 0.0029543217114163934, 0.14698784674825294, 0.78303045219238908, 0.0, 0.0},
  ErrorCase{3.0, 1.0, 0.69999999999999996, 0.5, 0.29999999999999999, 0.25, 0.10000000000000001, 0.40000000000000002, 0.050000000000000003, 2.0, 0.0, 0.24815043843929547, 0.0, 0.24815043843929547, 0.070000000000000005, 0.070981813573697841, 0.074999999999999997, 0.25524198894941603, 0.0, 0.0},
  ErrorCase{3.0, 1.0, 0.69999999999999996, 0.5, 0.29999999999999999, 0.25, 0.10000000000000001, 0.40000000000000002, 0.050000000000000003, 2.8999999999999999, 0.19475238642662937, 1.0, 0.0, 0.010763496564878787, 0.11381928694599161, 0.21462327762022923, 0.060393571018002795, 0.0071577252156443934, 0.0, 0.0},
}};
inline constexpr double kConcentration_0p5 = -4.1315119962088849;
inline constexpr double kConcentration_1 = -1.5423351362222547;
inline constexpr double kConcentration_2 = -0.074727203277540008;
inline constexpr double kFixtureArgminLambda0 = -4.0;
inline constexpr double kFixtureArgminLambda10 = -3.52;
struct TCase { double t, dof, p; };
inline constexpr std::array<TCase, 7> kStudentCases{{
  TCase{2.9620000000000002, 11.0, 0.012928968837218582},
  TCase{0.0, 11.0, 1.0},
  TCase{-0.62, 11.0, 0.54788629683937916},
  TCase{4.9089999999999998, 11.0, 0.00046491712293726742},
  TCase{1.0, 1.0, 0.5},
  TCase{2.5, 3.5, 0.075694643809490079},
  TCase{12.0, 40.0, 0.0000000000000078241713042559726},
}};
inline constexpr std::array<double, 9> kPenaltyProbs{0.91, 0.12, 0.55, 0.33, 0.78, 0.05, 0.66, 0.49, 0.21};
inline constexpr std::array<int, 9> kPenaltyGroups{0, 1, 2, 0, 1, 2, 0, 0, 1};
inline constexpr double kPenaltyValue = 0.26813888888888889;
}  // namespace oracle

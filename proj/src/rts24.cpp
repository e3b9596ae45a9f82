#include "cdro/errors.hpp"
#include "cdro/opf_dc.hpp"

#include <array>

namespace cdro {

DcNetwork make_rts24(index_t farms) {
  if (farms < 1 || farms > 12) throw InvalidArgument("the 24-bus instance hosts between 1 and 12 wind farms");
  DcNetwork net;
  net.buses = 24;
  net.slack = 12;  // bus 13

  struct Unit {
    int bus;
    double pmax, rmax, c, cu, cd;
  };
  // capacities scaled by 0.7 below
  const std::array<Unit, 12> units{{{1, 152, 60, 13.32, 15, 14},
                                    {2, 152, 60, 13.32, 15, 14},
                                    {7, 350, 100, 20.7, 10, 9},
                                    {13, 591, 240, 20.93, 8, 7},
                                    {15, 60, 42, 26.11, 7, 5},
                                    {15, 155, 60, 10.52, 16, 14},
                                    {16, 155, 60, 10.52, 16, 14},
                                    {18, 400, 0, 6.02, 0, 0},
                                    {21, 400, 0, 5.47, 0, 0},
                                    {22, 300, 0, 7.0, 0, 0},
                                    {23, 310, 96, 10.52, 17, 16},
                                    {23, 350, 80, 10.89, 16, 14}}};
  for (std::size_t p = 0; p < units.size(); ++p) {
    const auto& u = units[p];
    net.generators.push_back({"G" + std::to_string(p + 1), u.bus - 1, u.c, u.cu, u.cd, 0.0, 0.7 * u.pmax, u.rmax});
  }

  // share of the 2207 MW system demand, percent
  const std::array<std::pair<int, double>, 17> loads{{{1, 3.8},  {2, 3.4},  {3, 6.3},  {4, 2.6},  {5, 2.5},  {6, 4.8},
                                                     {7, 4.4},  {8, 6.0},  {9, 6.1},  {10, 6.8}, {13, 9.3}, {14, 6.8},
                                                     {15, 11.1}, {16, 3.5}, {18, 11.7}, {19, 6.4}, {20, 4.5}}};
  for (const auto& [bus, pct] : loads) net.loads.push_back({bus - 1, 2207.0 * pct / 100.0});

  struct Branch {
    int from, to;
    double x, cap;
  };
  const std::array<Branch, 34> branches{{{1, 2, 0.0146, 175},   {1, 3, 0.2253, 175},   {1, 5, 0.0907, 350},
                                         {2, 4, 0.1356, 175},   {2, 6, 0.205, 175},    {3, 9, 0.1271, 175},
                                         {3, 24, 0.084, 400},   {4, 9, 0.111, 175},    {5, 10, 0.094, 350},
                                         {6, 10, 0.0642, 175},  {7, 8, 0.0652, 350},   {8, 9, 0.1762, 175},
                                         {8, 10, 0.1762, 175},  {9, 11, 0.084, 400},   {9, 12, 0.084, 400},
                                         {10, 11, 0.084, 400},  {10, 12, 0.084, 400},  {11, 13, 0.0488, 500},
                                         {11, 14, 0.0426, 500}, {12, 13, 0.0488, 500}, {12, 23, 0.0985, 500},
                                         {13, 23, 0.0884, 500}, {14, 16, 0.0594, 500}, {15, 16, 0.0172, 500},
                                         {15, 21, 0.0249, 1000}, {15, 24, 0.0529, 500}, {16, 17, 0.0263, 500},
                                         {16, 19, 0.0234, 500}, {17, 18, 0.0143, 500}, {17, 22, 0.1069, 500},
                                         {18, 21, 0.0132, 1000}, {19, 20, 0.0203, 1000}, {20, 23, 0.0112, 1000},
                                         {21, 22, 0.0692, 500}}};
  for (const auto& b : branches) net.lines.push_back({b.from - 1, b.to - 1, b.x, b.cap});

  const std::array<int, 12> sites{3, 5, 7, 16, 21, 23, 14, 19, 1, 2, 13, 15};
  for (index_t w = 0; w < farms; ++w)
    net.wind.push_back({sites[static_cast<std::size_t>(w)] - 1, 1000.0 / static_cast<double>(farms), 0.5});
  net.compute_ptdf();
  return net;
}

}  // namespace cdro

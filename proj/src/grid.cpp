#include "egame/grid.hpp"

namespace egame {

Grid1D::Grid1D(double x_min, double x_max, std::size_t m, std::size_t interior_margin)
    : x_min_(x_min), x_max_(x_max), m_(m), margin_(interior_margin) {
  if (!(x_min < 0.0 && 0.0 < x_max))
    throw InvalidArgument("grid must satisfy x_min < 0 < x_max");
  if (m < 3) throw InvalidArgument("grid needs at least 3 nodes");
  if (2 * margin_ + 1 > m_)
    throw InvalidArgument("interior margin leaves no interior nodes");
  dx_ = (x_max_ - x_min_) / static_cast<double>(m_ - 1);
  ref_ = nearest(0.0);
  if (ref_ == 0 || ref_ == m_ - 1)
    throw InvalidArgument("reference node nearest 0 must be interior");
}

}  // namespace egame

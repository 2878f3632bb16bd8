#ifndef FIG8_CATALOG_HPP
#define FIG8_CATALOG_HPP

#include <span>

namespace fig8 {

/// One row of the reference catalog of symmetric periodic orbits: the
/// particle's initial condition (x4, 0, 0, vy4), the boundary leg T0 and the
/// full period T, both in units of t_bar.
struct CatalogRow {
    int index;
    int T0_over_Tbar;
    int T_over_Tbar;
    double x4;
    double vy4;
};

/// The 34 reference orbits (table 1).
std::span<const CatalogRow> reference_table();

}  // namespace fig8

#endif

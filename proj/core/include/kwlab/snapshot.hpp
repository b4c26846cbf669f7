#pragma once

// Field snapshot container, bit-exact round trip.
//
// Layout (little endian):
//   magic   "KWF1" (4 bytes)
//   u32     version (= 1), group kind (0 u1, 1 su2, 2 ur), rank, dim, N,
//           field count
//   per field: u32 name length, name bytes, u32 degree, u32 hermiticity class
//              (0 anti, 1 herm, 2 general)
//   payload: f64 coefficients ordered (field, component lexicographic, site
//            row-major x1 fastest, matrix entry row-major, real then imag)

#include <string>
#include <vector>

#include "kwlab/gauge.hpp"

namespace kwlab {

struct NamedField {
    std::string name;
    FormField field;
};

struct FieldSnapshot {
    GaugeGroup group;
    TorusLattice lat;
    std::vector<NamedField> fields;

    const FormField& at(const std::string& name) const;
};

void save_snapshot(const FieldSnapshot& snap, const std::string& path);
FieldSnapshot load_snapshot(const std::string& path);

}  // namespace kwlab

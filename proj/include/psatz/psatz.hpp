#ifndef PSATZ_PSATZ_HPP
#define PSATZ_PSATZ_HPP

#include "psatz/certificate_io.hpp"
#include "psatz/gram.hpp"
#include "psatz/lemma_bound.hpp"
#include "psatz/ldlt.hpp"
#include "psatz/matpoly.hpp"
#include "psatz/monomial.hpp"
#include "psatz/poly.hpp"
#include "psatz/problem.hpp"
#include "psatz/ratmat.hpp"
#include "psatz/rational.hpp"
#include "psatz/scalar_cert.hpp"
#include "psatz/schur_lift.hpp"
#include "psatz/witness.hpp"

namespace psatz {

inline const char* kVersion = "0.1.0";

}

#endif

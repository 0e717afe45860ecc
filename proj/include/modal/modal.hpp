#ifndef MODAL_MODAL_HPP
#define MODAL_MODAL_HPP

#include "modal/basis.hpp"
#include "modal/compare.hpp"
#include "modal/compensated.hpp"
#include "modal/error.hpp"
#include "modal/gamma_matrix.hpp"
#include "modal/geometry.hpp"
#include "modal/harness.hpp"
#include "modal/modal2d.hpp"
#include "modal/modal3d.hpp"
#include "modal/quadrature.hpp"
#include "modal/scheduler.hpp"
#include "modal/serialize.hpp"

#endif  // MODAL_MODAL_HPP

// Umbrella header.

#ifndef QACERT_QACERT_HPP
#define QACERT_QACERT_HPP

#include <qacert/compose.hpp>
#include <qacert/counterexample.hpp>
#include <qacert/gadget.hpp>
#include <qacert/geometry.hpp>
#include <qacert/omega.hpp>
#include <qacert/weights.hpp>
#include <qacert/xnum.hpp>

#endif  // QACERT_QACERT_HPP

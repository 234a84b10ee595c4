#ifndef CARTANKIT_CARTANKIT_HPP
#define CARTANKIT_CARTANKIT_HPP

#include "cartankit/error.hpp"
#include "cartankit/matalg.hpp"
#include "cartankit/groupoid.hpp"
#include "cartankit/twist.hpp"
#include "cartankit/reduced_cstar.hpp"
#include "cartankit/inclusion.hpp"
#include "cartankit/weyl.hpp"
#include "cartankit/envelope.hpp"
#include "cartankit/io.hpp"

#endif  // CARTANKIT_CARTANKIT_HPP

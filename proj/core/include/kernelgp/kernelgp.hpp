#pragma once

#include "kernelgp/errors.hpp"
#include "kernelgp/gp.hpp"
#include "kernelgp/kernels.hpp"
#include "kernelgp/kmat.hpp"
#include "kernelgp/parallel.hpp"
#include "kernelgp/precond.hpp"
#include "kernelgp/solver.hpp"
#include "kernelgp/train.hpp"

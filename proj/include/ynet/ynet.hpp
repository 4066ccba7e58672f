#pragma once

#include "ynet/condition.hpp"
#include "ynet/dataset.hpp"
#include "ynet/errors.hpp"
#include "ynet/gemm.hpp"
#include "ynet/layers.hpp"
#include "ynet/model.hpp"
#include "ynet/patch.hpp"
#include "ynet/powder_bed.hpp"
#include "ynet/random.hpp"
#include "ynet/sinter_oracle.hpp"
#include "ynet/tensor.hpp"
#include "ynet/training.hpp"
#include "ynet/weights.hpp"

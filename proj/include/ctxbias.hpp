#pragma once

#include "ctxbias/corpus.hpp"
#include "ctxbias/embformat.hpp"
#include "ctxbias/error.hpp"
#include "ctxbias/harness/audit.hpp"
#include "ctxbias/harness/config.hpp"
#include "ctxbias/harness/planted.hpp"
#include "ctxbias/harness/report.hpp"
#include "ctxbias/harness/source.hpp"
#include "ctxbias/linalg.hpp"
#include "ctxbias/metrics/kmeans.hpp"
#include "ctxbias/metrics/knn.hpp"
#include "ctxbias/metrics/subspace.hpp"
#include "ctxbias/metrics/svm.hpp"
#include "ctxbias/random.hpp"
#include "ctxbias/wordlists.hpp"

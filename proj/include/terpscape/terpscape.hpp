#pragma once

#include "terpscape/classify/cv.hpp"
#include "terpscape/classify/fit.hpp"
#include "terpscape/classify/metrics.hpp"
#include "terpscape/classify/search.hpp"
#include "terpscape/cluster/agglomerative.hpp"
#include "terpscape/cluster/benchmark.hpp"
#include "terpscape/cluster/kmeans.hpp"
#include "terpscape/cluster/metrics.hpp"
#include "terpscape/common.hpp"
#include "terpscape/config.hpp"
#include "terpscape/csv.hpp"
#include "terpscape/dataset.hpp"
#include "terpscape/dimred/embedding.hpp"
#include "terpscape/dimred/fast_ica.hpp"
#include "terpscape/dimred/kernel_pca.hpp"
#include "terpscape/dimred/pca.hpp"
#include "terpscape/dimred/tsne.hpp"
#include "terpscape/feature_matrix.hpp"
#include "terpscape/ingest.hpp"
#include "terpscape/linalg.hpp"
#include "terpscape/matrix.hpp"
#include "terpscape/parallel.hpp"
#include "terpscape/preprocess.hpp"
#include "terpscape/profile.hpp"
#include "terpscape/rng.hpp"

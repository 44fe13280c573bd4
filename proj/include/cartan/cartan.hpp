#ifndef CARTAN_CARTAN_HPP
#define CARTAN_CARTAN_HPP

#include "cartan/catalog.hpp"
#include "cartan/classify.hpp"
#include "cartan/connection.hpp"
#include "cartan/document.hpp"
#include "cartan/geodesic.hpp"
#include "cartan/json_io.hpp"
#include "cartan/legendre.hpp"
#include "cartan/metric.hpp"
#include "cartan/parallel.hpp"
#include "cartan/projective.hpp"
#include "cartan/randers.hpp"
#include "cartan/sampling.hpp"

#endif

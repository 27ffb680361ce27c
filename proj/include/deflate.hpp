#pragma once

#include "deflate/errors.hpp"
#include "deflate/series.hpp"
#include "deflate/system.hpp"
#include "deflate/linalg.hpp"
#include "deflate/bergman.hpp"
#include "deflate/rank.hpp"
#include "deflate/deflation.hpp"
#include "deflate/certificates.hpp"
#include "deflate/io.hpp"
#include "deflate/cli.hpp"

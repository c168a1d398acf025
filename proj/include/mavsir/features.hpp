#pragma once

#include "mavsir/features/color.hpp"
#include "mavsir/features/descriptor.hpp"
#include "mavsir/features/extract.hpp"
#include "mavsir/features/fourier.hpp"
#include "mavsir/features/gabor.hpp"
#include "mavsir/features/glcm.hpp"
#include "mavsir/features/hough.hpp"
#include "mavsir/features/sift.hpp"
#include "mavsir/features/wavelet.hpp"

#ifndef MHI_MHI_HPP
#define MHI_MHI_HPP

#include "classify.hpp"
#include "commands.hpp"
#include "diagnostics.hpp"
#include "error.hpp"
#include "formats.hpp"
#include "imgio.hpp"
#include "imgproc.hpp"
#include "moments.hpp"
#include "rng.hpp"
#include "synth.hpp"
#include "temporal.hpp"

#endif // MHI_MHI_HPP

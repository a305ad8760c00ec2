#pragma once

// Each build of the library lives in its own inline namespace so the float and
// double builds can be linked into one program.
#ifdef MRFE_FP64
#define MRFE_PRECISION fp64
#else
#define MRFE_PRECISION fp32
#endif

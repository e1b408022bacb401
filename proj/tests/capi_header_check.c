/* Compiled as C to keep the public header free of C++ constructs. */
#include "gridstress/gridstress.h"

int gs_c_header_check(void) {
  gs_options options;
  gs_options_init(&options);
  return options.measure == GS_MEASURE_BOTH && gs_status_name(GS_OK) != NULL;
}

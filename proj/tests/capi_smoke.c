// Copyright 2026 The kmpc Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <math.h>
#include <stdio.h>
#include <stdlib.h>

#include "kmpc/kmpc.h"

static int failures = 0;

#define CHECK(cond)                                                   \
  do {                                                                \
    if (!(cond)) {                                                    \
      fprintf(stderr, "%s:%d: check failed: %s\n", __FILE__, __LINE__, #cond); \
      ++failures;                                                     \
    }                                                                 \
  } while (0)

int main(void) {
  kmpc_config* config = NULL;
  CHECK(kmpc_config_default(&config) == KMPC_OK);

  uint64_t n = 0;
  CHECK(kmpc_config_scenario_count(config, &n) == KMPC_OK);
  CHECK(n == 2455);

  kmpc_config* bad = NULL;
  CHECK(kmpc_config_parse("{\"reach\": {\"omega\": 1.5}}", &bad) == KMPC_ERR_INVALID_ARGUMENT);
  CHECK(bad == NULL);
  CHECK(kmpc_last_error()[0] != '\0');

  kmpc_controller* mpc = NULL;
  CHECK(kmpc_controller_mpc(config, &mpc) == KMPC_OK);
  const double x[2] = {-0.2, 0.1};
  double u = 0.0;
  CHECK(kmpc_controller_evaluate(mpc, x, &u) == KMPC_OK);
  CHECK(isfinite(u) && fabs(u) <= 4.5 + 1e-6);

  kmpc_controller_free(mpc);
  kmpc_config_free(config);
  if (failures == 0) printf("capi smoke ok (%s)\n", kmpc_version());
  return failures == 0 ? EXIT_SUCCESS : EXIT_FAILURE;
}

#include <stdio.h>
#include <string.h>
#include "toricmmp.h"

static const char *P2 = "{\"dim\": 2, \"rays\": [[1,0],[0,1],[-1,-1]], \"cones\": [[0,1],[1,2],[2,0]]}";

int main(void) {
    ToricFan *fan = NULL;
    if (toric_fan_from_json(P2, &fan) != TORIC_STATUS_OK) return 10;
    size_t dim = 0, rays = 0, rho = 0;
    if (toric_fan_shape(fan, &dim, &rays) != TORIC_STATUS_OK || dim != 2 || rays != 3) return 11;
    if (toric_fan_picard_number(fan, &rho) != TORIC_STATUS_OK || rho != 1) return 12;
    ToricDivisor *d = NULL;
    if (toric_divisor_from_json(fan, "{\"coeffs\": [\"-3\", \"0\", \"0\"]}", &d) != TORIC_STATUS_OK) return 13;
    size_t h2 = 0;
    if (toric_cohomology(fan, d, 2, &h2) != TORIC_STATUS_OK || h2 != 1) return 14;
    char *verdict = NULL;
    if (toric_classify_pair(fan, NULL, &verdict) != TORIC_STATUS_OK || strcmp(verdict, "terminal") != 0) return 15;
    toric_string_free(verdict);
    ToricFan *bad = NULL;
    if (toric_fan_from_json("{\"dim\": 2, \"rays\": [[1,0]], \"cones\": [[7]]}", &bad) != TORIC_STATUS_PARSE_ERROR) return 16;
    if (strstr(toric_last_error(), "cones[0][0]") == NULL) return 17;
    toric_divisor_free(d);
    toric_fan_free(fan);
    printf("ok %s\n", toric_version());
    return 0;
}

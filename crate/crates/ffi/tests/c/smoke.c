#include <stdio.h>
#include "oam_swipt.h"

int main(void) {
    OsLinkParams p;
    OsLink *link = NULL;
    OsRegion *region = NULL;
    size_t n = 0;
    double gains[8];
    double rate = 0.0;

    if (os_link_params_default(&p) != OS_STATUS_OK) return 1;
    if (os_link_new(&p, &link) != OS_STATUS_OK) return 2;
    if (os_link_mode_count(link, &n) != OS_STATUS_OK || n != 8) return 3;
    if (os_link_mode_gains(link, gains, 8) != OS_STATUS_OK) return 4;
    if (os_link_trace_lagrangian(link, OS_BASELINE_OAM, 20, &region) != OS_STATUS_OK) return 5;
    if (os_region_rate_at(region, 0.0, &rate) != OS_STATUS_OK || !(rate > 0.0)) return 6;
    if (os_link_new(NULL, &link) != OS_STATUS_NULL_POINTER) return 7;
    printf("%.6f %s\n", rate, os_last_error_message());
    os_region_free(region);
    os_link_free(link);
    return 0;
}

#include <math.h>
#include <stdio.h>
#include <string.h>

#include "astrocity.h"

int main(void) {
    double x = 0, y = 0;
    if (astrocity_project_forward("IAU_2015:30185", 0.67416, 23.47314, &x, &y) != ASTROCITY_STATUS_OK) {
        fprintf(stderr, "forward failed: %s\n", astrocity_last_error());
        return 1;
    }
    if (fabs(x - 797715.8357) > 0.5 || fabs(y + 1084015.403) > 0.5) {
        fprintf(stderr, "unexpected x=%f y=%f\n", x, y);
        return 1;
    }
    if (astrocity_project_forward("EPSG:4326", 0, 0, &x, &y) != ASTROCITY_STATUS_DOMAIN) {
        return 1;
    }
    if (astrocity_last_error() == NULL || strstr(astrocity_last_error(), "4326") == NULL) {
        return 1;
    }

    AstrocityRegistry *reg = astrocity_registry_builtin();
    char *schema = NULL;
    if (astrocity_registry_emit_schema(reg, &schema) != ASTROCITY_STATUS_OK || strstr(schema, "+SpaceCrater") == NULL) {
        return 1;
    }
    astrocity_string_free(schema);
    astrocity_registry_free(reg);
    printf("ok\n");
    return 0;
}

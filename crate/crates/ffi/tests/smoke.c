#include <stdio.h>
#include "distexplore.h"

int main(void) {
    DxEnv *env = NULL;
    if (dx_env_new("kind = \"cube\"", &env) != DX_STATUS_OK) {
        fprintf(stderr, "%s\n", dx_last_error());
        return 1;
    }
    char *start = NULL, *next = NULL;
    uintptr_t n = 0;
    dx_env_state_key(env, &start);
    dx_env_action_count(env, &n);
    if (dx_env_step(env, "right", &next) != DX_STATUS_OK) {
        return 1;
    }
    double a[] = {1, 2, 3}, b[] = {4, 5, 6}, u, p;
    dx_mann_whitney_u(a, 3, b, 3, &u, &p);
    printf("%s -> %s (%lu actions) p=%.1f\n", start, next, (unsigned long)n, p);
    dx_string_free(start);
    dx_string_free(next);
    dx_env_free(env);
    return 0;
}

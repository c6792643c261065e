#include <math.h>
#include <stdio.h>
#include <string.h>

#include "millefeuille.h"

static int failures = 0;

static void check(int ok, const char *what) {
    printf("%s %s\n", ok ? "ok" : "FAILED", what);
    if (!ok) failures++;
}

int main(void) {
    double d = 0.0;
    check(mf_madic_distance("2:{0:1}", "2:{}", 0.0, &d) == MF_STATUS_OK && d == 2.0, "madic distance");

    MfStructure *e = NULL;
    check(mf_structure_from_json("{\"layers\":[{\"alpha\":1.0,\"size\":1},{\"alpha\":2.0,\"size\":1}],\"snowflake\":1.0}", &e) == MF_STATUS_OK,
          "structure from json");
    check(mf_structure_dim(e) == 2, "dimension");

    double x[2] = {0.0, exp(4.0)};
    double y[2] = {0.0, 0.0};
    check(mf_visual_distance(e, x, y, 2, &d) == MF_STATUS_OK && fabs(d - exp(2.0)) < 1e-9 * exp(2.0), "visual distance");
    check(mf_visual_distance(e, x, y, 1, &d) == MF_STATUS_MISMATCH, "dimension mismatch");

    char *msg = mf_last_error_message();
    check(msg != NULL && strlen(msg) > 0, "error message");
    mf_string_free(msg);

    check(mf_madic_distance("2:{0:7}", "2:{}", 0.0, &d) == MF_STATUS_PARSE, "malformed point");
    check(mf_madic_distance(NULL, "2:{}", 0.0, &d) == MF_STATUS_NULL_POINTER, "null pointer");

    MfStructure *f = NULL;
    check(mf_structure_from_json("{\"layers\":[{\"alpha\":1.0,\"size\":1}]}", &f) == MF_STATUS_OK, "second structure");
    int code = -1;
    char *verdict = NULL;
    check(mf_classify(f, 8, f, 32, &code, &verdict) == MF_STATUS_OK && code == 1 && strstr(verdict, "\"r\":2") != NULL,
          "classify");
    mf_string_free(verdict);

    mf_structure_free(f);
    mf_structure_free(e);
    printf("%d failures\n", failures);
    return failures == 0 ? 0 : 1;
}

#include <stdio.h>
#include <string.h>

#include "sentiscope.h"

#define CHECK(cond)                                                   \
    do {                                                              \
        if (!(cond)) {                                                \
            fprintf(stderr, "%s:%d: %s\n", __FILE__, __LINE__, #cond); \
            return 1;                                                 \
        }                                                             \
    } while (0)

int main(int argc, char **argv) {
    CHECK(argc == 2);
    CHECK(strlen(ss_version()) > 0);

    SsLexicon *lex = NULL;
    CHECK(ss_lexicon_load(argv[1], "afinn", &lex) == SS_STATUS_OK);
    double score = 0.0;
    CHECK(ss_score_unigram(lex, "So happy, great day", &score) == SS_STATUS_OK);
    CHECK(score == 6.0);
    ss_lexicon_free(lex);

    CHECK(ss_lexicon_load("/missing.tsv", "x", &lex) == SS_STATUS_IO);
    CHECK(ss_last_error_message() != NULL);

    double y[40];
    for (int i = 0; i < 40; i++) y[i] = (i < 20 ? 0.0 : 3.0) + 0.01 * (i % 3);
    SsSegmentation *seg = NULL;
    CHECK(ss_segment(y, 40, 2, 0, &seg) == SS_STATUS_OK);
    CHECK(ss_segmentation_chosen_m(seg) == 1);
    size_t bp = 0;
    CHECK(ss_segmentation_breakpoints(seg, 1, &bp, 1) == SS_STATUS_OK);
    CHECK(bp == 20);
    ss_segmentation_free(seg);

    double a[] = {1, 2, 3}, b[] = {4, 5, 6};
    SsMwResult mw;
    CHECK(ss_mann_whitney(a, 3, b, 3, SS_MW_MODE_EXACT, &mw) == SS_STATUS_OK);
    CHECK(mw.p_value > 0.0999 && mw.p_value < 0.1001);

    char *clean = NULL;
    CHECK(ss_clean_text("Hello, World! #x", &clean) == SS_STATUS_OK);
    CHECK(strcmp(clean, "hello world") == 0);
    ss_string_free(clean);

    puts("ok");
    return 0;
}

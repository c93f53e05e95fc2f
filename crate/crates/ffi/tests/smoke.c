#include <stdio.h>
#include "spreader.h"

int main(int argc, char **argv) {
    if (argc != 2) return 64;
    SpCorpus *corpus = NULL, *train = NULL, *test = NULL;
    SpModel *model = NULL;
    SpMetrics m;
    if (sp_corpus_load(argv[1], "en", &corpus) != SP_STATUS_OK) goto fail;
    if (sp_corpus_split(corpus, 7, 10, 1, &train, &test) != SP_STATUS_OK) goto fail;
    if (sp_model_train(train, "svm:tfidf/char/1-3/3000/1", &model) != SP_STATUS_OK) goto fail;
    if (sp_model_evaluate(model, test, 1, &m) != SP_STATUS_OK) goto fail;
    const char *tweets[] = {"RT #USER#: new study published #URL#"};
    unsigned char label = 9;
    if (sp_model_predict(model, tweets, 1, &label, NULL) != SP_STATUS_OK) goto fail;
    if (sp_model_load("/nonexistent.model", &model) != SP_STATUS_IO) return 3;
    printf("authors=%zu accuracy=%.4f label=%u\n", sp_corpus_len(corpus), m.accuracy, label);
    sp_model_free(model);
    sp_corpus_free(train);
    sp_corpus_free(test);
    sp_corpus_free(corpus);
    return 0;
fail:
    fprintf(stderr, "error: %s\n", sp_last_error());
    return 1;
}

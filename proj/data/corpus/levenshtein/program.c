#include <string.h>

int min(int x, int y, int z) {
    if (x < y) return (x < z) ? x : z;
    else return (y < z) ? y : z;
}
int levenshtein(char *s1, char *s2) {
    int len1 = strlen(s1), len2 = strlen(s2);
    int matrix[len1 + 1][len2 + 1];

    for (int x = 0; x <= len1; x++) matrix[x][0] = x;

    for (int y = 0; y <= len2; y++) matrix[0][y] = y;
    for (int x = 1; x <= len1; x++) {
        for (int y = 1; y <= len2; y++) {
            int cost = (s1[x - 1] == s2[y - 1]) ? 0 : 1;
            matrix[x][y] = min(matrix[x - 1][y] + 1, matrix[x][y - 1] + 1, matrix[x - 1][y - 1] + cost);
        }
    }
    return matrix[len1][len2];
}

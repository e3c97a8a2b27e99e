/*@
  @ requires \valid(x);
  @ assigns *x;
*/
void increment(int *x) {
  *x = *x + 1;
}

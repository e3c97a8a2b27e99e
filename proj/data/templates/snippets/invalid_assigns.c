/*@
  @ assigns x;
*/
void reset(void) {
  int x = 0;
  x = x + 1;
}
